#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phplate/basis.hpp"
#include "phplate/jet.hpp"
#include "phplate/material.hpp"
#include "phplate/mesh.hpp"
#include "phplate/phsys.hpp"
#include "phplate/quadrature.hpp"

namespace phplate {

/// Which boundary quantities enter as inputs.
///  force:     integrate the momentum equation twice; inputs are shear and
///             bending moment, outputs velocity and slope velocity.
///  kinematic: integrate the curvature equation twice; roles swap.
enum class ControlVariant { force, kinematic };

inline std::string_view to_string(ControlVariant v) {
  return v == ControlVariant::force ? "force" : "kinematic";
}

enum class BoundaryCondition { clamped, simply_supported, free, input };

inline std::string_view to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::clamped: return "clamped";
    case BoundaryCondition::simply_supported: return "simply_supported";
    case BoundaryCondition::free: return "free";
    case BoundaryCondition::input: return "input_signal";
  }
  return "?";
}

/// Euler-Bernoulli beam in port-Hamiltonian form on Hermite cubics.
///
/// Both the momentum alpha_w and the curvature alpha_k live on the Hermite
/// space (global dof 2 * node + {value, slope}). Blocks: "w" then "kappa".
/// Input columns are ordered as the boundary port vectors
///   force:     (e_k'(0), -e_k(0), -e_k'(L), e_k(L))
///   kinematic: (e_w(0),  e_w'(0), e_w(L),   e_w'(L)).
struct BeamPhSystem {
  Mesh1D mesh;
  MaterialParams params;
  ControlVariant variant;
  SparseMatrix mass;      // Hermite mass matrix (shared by both fields)
  SparseMatrix coupling;  // kappa rows, w columns
  SparseMatrix boundary;  // 2N x 4 input map
  AssembledPhSystem system;

  int field_dofs() const { return 2 * mesh.nodes(); }
};

namespace detail {

inline SparseMatrix hermite_matrix(const Mesh1D& mesh, int test_order, int trial_order) {
  const auto rule = gauss_legendre(4);
  const double h = mesh.h();
  Triplets t;
  for (int e = 0; e < mesh.elements(); ++e) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto n = hermite_cubic(rule.points[q], h);
      const double w = rule.weights[q] * h;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          t.emplace_back(2 * e + i, 2 * e + j, w * n[test_order][i] * n[trial_order][j]);
    }
  }
  const int n = 2 * mesh.nodes();
  return from_triplets(n, n, t);
}

}  // namespace detail

inline BeamPhSystem assemble_beam(const Mesh1D& mesh, const MaterialParams& p, ControlVariant variant) {
  p.validate();
  const int n = 2 * mesh.nodes();
  const int last = 2 * mesh.elements();
  const SparseMatrix mass = detail::hermite_matrix(mesh, 0, 0);
  const SparseMatrix coupling = variant == ControlVariant::force
                                    ? detail::hermite_matrix(mesh, 0, 2)
                                    : detail::hermite_matrix(mesh, 2, 0);

  Triplets jt;
  append_block(jt, coupling, n, 0);
  append_block(jt, SparseMatrix(coupling.transpose()), 0, n, -1.0);
  const SparseMatrix j = from_triplets(2 * n, 2 * n, jt);

  Triplets kt;
  append_block(kt, mass, 0, 0, 1.0 / p.line_density);
  append_block(kt, mass, n, n, p.flexural_rigidity());
  const SparseMatrix k = from_triplets(2 * n, 2 * n, kt);

  Triplets mt;
  append_block(mt, mass, 0, 0);
  append_block(mt, mass, n, n);
  const SparseMatrix m = from_triplets(2 * n, 2 * n, mt);

  Triplets bt;
  std::vector<std::string> labels;
  if (variant == ControlVariant::force) {
    bt = {{0, 0, 1.0}, {1, 1, 1.0}, {last, 2, 1.0}, {last + 1, 3, 1.0}};
    labels = {"shear_0", "moment_0", "shear_L", "moment_L"};
  } else {
    bt = {{n + 1, 0, 1.0}, {n + 0, 1, -1.0}, {n + last + 1, 2, -1.0}, {n + last, 3, 1.0}};
    labels = {"velocity_0", "slope_velocity_0", "velocity_L", "slope_velocity_L"};
  }
  const SparseMatrix b = from_triplets(2 * n, 4, bt);

  AssembledPhSystem sys(BlockLayout({"w", "kappa"}, {n, n}), m, j, k, b, labels);
  return BeamPhSystem{mesh, p, variant, mass, coupling, b, std::move(sys)};
}

/// Applies end conditions: essential ones by eliminating dofs, natural ones
/// through zero inputs. Only the input columns of `input` ends survive.
inline ConstrainedSystem apply_beam_conditions(const BeamPhSystem& beam, BoundaryCondition left,
                                               BoundaryCondition right) {
  const int n = beam.field_dofs();
  std::vector<int> removed;
  auto eliminate = [&](int value, BoundaryCondition bc) {
    const int slope = value + 1;
    if (beam.variant == ControlVariant::force) {
      if (bc == BoundaryCondition::clamped) removed.insert(removed.end(), {value, slope});
      if (bc == BoundaryCondition::simply_supported) removed.push_back(value);
    } else {
      if (bc == BoundaryCondition::free) removed.insert(removed.end(), {n + value, n + slope});
      if (bc == BoundaryCondition::simply_supported) removed.push_back(n + value);
    }
  };
  eliminate(0, left);
  eliminate(n - 2, right);
  return constrain(beam.system, removed, [&](int c) {
    return (c < 2 ? left : right) == BoundaryCondition::input;
  });
}

/// Boundary port vectors of the beam Dirac structure,
///   f = (e_w(0), e_w'(0), e_k'(L), e_k(L)),
///   e = (e_k'(0), -e_k(0), -e_w(L), e_w'(L)).
struct BeamBoundaryPorts {
  std::array<double, 4> flow{};
  std::array<double, 4> effort{};
};

inline BeamBoundaryPorts beam_ports_from_traces(Jet1 w0, Jet1 wl, Jet1 k0, Jet1 kl) {
  return {{w0.v, w0.d(0), kl.d(0), kl.v}, {k0.d(0), -k0.v, -wl.v, wl.d(0)}};
}

/// Ports from Hermite effort coefficients (e_w, e_k) of an unreduced beam.
inline BeamBoundaryPorts beam_boundary_ports(const BeamPhSystem& beam, const Eigen::VectorXd& effort) {
  const int n = beam.field_dofs();
  if (effort.size() != 2 * n)
    throw std::invalid_argument("beam_boundary_ports: expected " + std::to_string(2 * n) +
                                " effort coefficients, got " + std::to_string(effort.size()));
  auto trace = [&](int dof) {
    Jet1 j;
    j.v = effort[dof];
    j.g[0] = effort[dof + 1];
    return j;
  };
  return beam_ports_from_traces(trace(0), trace(n - 2), trace(n), trace(2 * n - 2));
}

/// Continuous representation of a Hermite coefficient vector.
inline std::function<Jet1(double)> hermite_field(const Mesh1D& mesh, Eigen::VectorXd coeffs) {
  if (coeffs.size() != 2 * mesh.nodes()) throw std::invalid_argument("hermite_field: size mismatch");
  return [mesh, c = std::move(coeffs)](double x) {
    const int e = mesh.locate(x);
    const auto n = hermite_cubic((x - e * mesh.h()) / mesh.h(), mesh.h());
    Jet1 j;
    for (int i = 0; i < 4; ++i) {
      j.v += c[2 * e + i] * n[0][i];
      j.g[0] += c[2 * e + i] * n[1][i];
      j.h[0][0] += c[2 * e + i] * n[2][i];
    }
    return j;
  };
}

/// Bond-space element (f, f_boundary, e, e_boundary) of the beam on [0, L].
struct BeamBond {
  std::function<double(double)> flow_w, flow_k, effort_w, effort_k;
  BeamBoundaryPorts ports;
};

/// Member of the Dirac structure generated by efforts e: f = -J e, i.e.
/// f_w = d2 e_k / dx2, f_k = -d2 e_w / dx2, ports from the traces.
inline BeamBond beam_structure_element(std::function<Jet1(double)> ew, std::function<Jet1(double)> ek,
                                       double length) {
  BeamBond b;
  b.flow_w = [ek](double x) { return ek(x).dd(0, 0); };
  b.flow_k = [ew](double x) { return -ew(x).dd(0, 0); };
  b.effort_w = [ew](double x) { return ew(x).v; };
  b.effort_k = [ek](double x) { return ek(x).v; };
  b.ports = beam_ports_from_traces(ew(0.0), ew(length), ek(0.0), ek(length));
  return b;
}

struct PairingResult {
  double interior = 0.0;
  double boundary = 0.0;
  double corners = 0.0;
  double residual = 0.0;  // interior + boundary + corners
  double scale = 0.0;     // sum of absolute contributions
  double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// <<a, b>> = int (f_a e_b + f_b e_a) dx + f_a,bd . e_b,bd + f_b,bd . e_a,bd.
inline PairingResult beam_pairing(const BeamBond& a, const BeamBond& b, double length,
                                  int points = 6, int pieces = 16) {
  const auto rule = composite_gauss(0.0, length, points, pieces);
  PairingResult r;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double x = rule.points[q], w = rule.weights[q];
    const double t1 = a.flow_w(x) * b.effort_w(x) + a.flow_k(x) * b.effort_k(x);
    const double t2 = b.flow_w(x) * a.effort_w(x) + b.flow_k(x) * a.effort_k(x);
    r.interior += w * (t1 + t2);
    r.scale += w * (std::abs(t1) + std::abs(t2));
  }
  for (int i = 0; i < 4; ++i) {
    const double t1 = a.ports.flow[i] * b.ports.effort[i];
    const double t2 = b.ports.flow[i] * a.ports.effort[i];
    r.boundary += t1 + t2;
    r.scale += std::abs(t1) + std::abs(t2);
  }
  r.residual = r.interior + r.boundary;
  return r;
}

}  // namespace phplate
