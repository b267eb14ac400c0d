#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phplate {

/// Physical constants of a plate or beam model.
///
/// Plate models use surface_density, young_modulus, poisson, thickness and
/// damping. Beam models use line_density and second_moment together with
/// young_modulus (flexural rigidity EI).
struct MaterialParams {
  double surface_density = 1.0;  // mu, mass / area
  double young_modulus = 1.0;    // E, pressure
  double poisson = 0.0;          // nu
  double thickness = 1.0;        // h, length
  double damping = 0.0;          // r, mass / (area * time)
  double line_density = 1.0;     // rho, mass / length
  double second_moment = 1.0;    // I, length^4

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const {
    auto fail = [](const std::string& what) {
      throw std::invalid_argument("MaterialParams: " + what);
    };
    if (!(surface_density > 0.0)) fail("surface_density must be > 0");
    if (!(young_modulus > 0.0)) fail("young_modulus must be > 0");
    if (!(thickness > 0.0)) fail("thickness must be > 0");
    if (!(poisson >= 0.0 && poisson < 0.5)) fail("poisson must lie in [0, 0.5)");
    if (!(damping >= 0.0)) fail("damping must be >= 0");
    if (!(line_density > 0.0)) fail("line_density must be > 0");
    if (!(second_moment > 0.0)) fail("second_moment must be > 0");
  }

  double flexural_rigidity() const { return young_modulus * second_moment; }

  /// Plate parameters reproducing a prescribed bending rigidity D with h = 1.
  static MaterialParams plate_with_rigidity(double rigidity, double mu, double nu = 0.0) {
    MaterialParams p;
    p.surface_density = mu;
    p.poisson = nu;
    p.thickness = 1.0;
    p.young_modulus = 12.0 * rigidity * (1.0 - nu * nu);
    return p;
  }
};

/// D = E h^3 / (12 (1 - nu^2)).
inline double bending_rigidity(const MaterialParams& p) {
  const double one_minus_nu2 = 1.0 - p.poisson * p.poisson;
  if (!(one_minus_nu2 > 0.0)) throw std::domain_error("bending_rigidity: nu^2 >= 1");
  return p.young_modulus * p.thickness * p.thickness * p.thickness / (12.0 * one_minus_nu2);
}

/// Constitutive matrix over curvatures ordered (k_xx, k_yy, k_xy) where
/// k_xy = 2 d2w/dxdy. Hence the (1 - nu) / 2 shear entry.
using BendingMatrix = Eigen::Matrix3d;

inline BendingMatrix bending_matrix(const MaterialParams& p) {
  p.validate();
  const double d = bending_rigidity(p);
  const double nu = p.poisson;
  BendingMatrix m;
  m << 1.0, nu, 0.0,
       nu, 1.0, 0.0,
       0.0, 0.0, 0.5 * (1.0 - nu);
  return d * m;
}

/// Point value of the plate energy variables: linear momentum density and
/// the curvature vector.
struct ContinuousState {
  double momentum = 0.0;                // alpha_w = mu * v
  Eigen::Vector3d curvature = Eigen::Vector3d::Zero();  // (k_xx, k_yy, k_xy)

  Eigen::Vector4d as_vector() const {
    return {momentum, curvature[0], curvature[1], curvature[2]};
  }
};

/// Co-energy tuple (v, M_xx, M_yy, M_xy).
struct Coenergy {
  double velocity = 0.0;
  Eigen::Vector3d moments = Eigen::Vector3d::Zero();

  Eigen::Vector4d as_vector() const {
    return {velocity, moments[0], moments[1], moments[2]};
  }
};

inline Coenergy coenergy_pointwise(const ContinuousState& a, const MaterialParams& p) {
  return {a.momentum / p.surface_density, bending_matrix(p) * a.curvature};
}

/// Energy per unit area: 1/2 alpha_w^2 / mu + 1/2 k^T D k.
inline double hamiltonian_density(const ContinuousState& a, const MaterialParams& p) {
  const BendingMatrix d = bending_matrix(p);
  return 0.5 * a.momentum * a.momentum / p.surface_density +
         0.5 * a.curvature.dot(d * a.curvature);
}

}  // namespace phplate
