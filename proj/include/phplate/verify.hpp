#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include "phplate/beam.hpp"
#include "phplate/jet.hpp"
#include "phplate/mesh.hpp"
#include "phplate/plate.hpp"
#include "phplate/quadrature.hpp"

namespace phplate {

using ScalarField = std::function<Jet2(Point2)>;

/// Raised when a test field does not vanish (with its gradient) on the
/// domain boundary.
class SupportViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Test field generators
// ---------------------------------------------------------------------------

inline ScalarField constant_field(double c) {
  return [c](Point2) { return Jet2::constant(c); };
}

/// sum c_ij x^i y^j over i + j <= degree with coefficients in [-1, 1].
inline ScalarField random_polynomial(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::array<double, 3>> terms;
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j) terms.push_back({dist(rng), double(i), double(j)});
  return [terms](Point2 p) {
    const Jet2 x = Jet2::variable(p.x, 0), y = Jet2::variable(p.y, 1);
    Jet2 out;
    for (const auto& t : terms) out = out + t[0] * pow(x, int(t[1])) * pow(y, int(t[2]));
    return out;
  };
}

enum class BumpKind { polynomial, exponential };

/// Bump on [0, a] x [0, b] vanishing with its first and second derivatives
/// on the boundary: (16 s(1-s) t(1-t))^3 or exp(8 - 1/(s(1-s)) - 1/(t(1-t)))
/// with s = x / a, t = y / b (both equal 1 at the centre).
inline ScalarField bump(BumpKind kind, double a, double b) {
  return [kind, a, b](Point2 p) {
    const Jet2 s = Jet2::variable(p.x, 0) * (1.0 / a), t = Jet2::variable(p.y, 1) * (1.0 / b);
    const Jet2 qs = s * (1.0 - s), qt = t * (1.0 - t);
    if (kind == BumpKind::polynomial) return pow(16.0 * qs * qt, 3);
    if (!(qs.v > 0.0) || !(qt.v > 0.0)) return Jet2::constant(0.0);
    return exp(8.0 - inverse(qs) - inverse(qt));
  };
}

inline ScalarField product(ScalarField f, ScalarField g) {
  return [f, g](Point2 p) { return f(p) * g(p); };
}

/// Polynomial times exp(c_x x + c_y y): smooth, non-polynomial, no support
/// restriction (boundary terms active).
inline ScalarField random_smooth_field(std::mt19937_64& rng, int degree = 3) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double cx = dist(rng), cy = dist(rng);
  return product(random_polynomial(rng, degree), [cx, cy](Point2 p) {
    return exp(cx * Jet2::variable(p.x, 0) + cy * Jet2::variable(p.y, 1));
  });
}

using ScalarField1D = std::function<Jet1(double)>;

/// 1D analogue of random_smooth_field.
inline ScalarField1D random_smooth_field_1d(std::mt19937_64& rng, int degree = 3) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> c(degree + 1);
  for (auto& v : c) v = dist(rng);
  const double k = dist(rng);
  return [c, k](double x) {
    const Jet1 t = Jet1::variable(x, 0);
    Jet1 poly;
    for (std::size_t i = 0; i < c.size(); ++i) poly = poly + c[i] * pow(t, int(i));
    return poly * exp(k * t);
  };
}

/// Scalar f and symmetric tensor E = [[E_xx, E_xy], [E_xy, E_yy]] (tensorial
/// convention: no factor 2 on E_xy) on [0, a] x [0, b].
struct TestFieldSpec {
  double a = 1.0;
  double b = 1.0;
  ScalarField scalar;
  std::array<ScalarField, 3> tensor;  // xx, yy, xy
  int points = 10;  // Gauss points per piece and direction
  int pieces = 2;   // pieces per direction
};

inline TestFieldSpec random_test_fields(std::mt19937_64& rng, BumpKind kind = BumpKind::polynomial,
                                        int degree = 3, double a = 1.0, double b = 1.0) {
  TestFieldSpec spec;
  spec.a = a;
  spec.b = b;
  spec.scalar = product(random_polynomial(rng, degree), bump(kind, a, b));
  for (auto& c : spec.tensor) c = product(random_polynomial(rng, degree), bump(kind, a, b));
  if (kind == BumpKind::exponential) {
    spec.points = 12;
    spec.pieces = 8;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Adjointness of grad grad and div Div
// ---------------------------------------------------------------------------

struct AdjointnessResult {
  double div_div_side = 0.0;  // int div(Div E) f
  double hessian_side = 0.0;  // int E : Grad grad f
  double absolute = 0.0;
  double scale = 0.0;  // int |div Div E f| + int |E : Hess f|
  double residual = 0.0;
};

inline void check_support(const ScalarField& f, double a, double b, int samples = 64) {
  double interior = 0.0;
  for (int j = 1; j < 8; ++j)
    for (int i = 1; i < 8; ++i) interior = std::max(interior, std::abs(f({a * i / 8.0, b * j / 8.0}).v));
  const double tol = 1e-12 * std::max(interior, 1.0);
  for (int k = 0; k <= samples; ++k) {
    const double s = double(k) / samples;
    for (Point2 p : {Point2{s * a, 0.0}, Point2{s * a, b}, Point2{0.0, s * b}, Point2{a, s * b}}) {
      const Jet2 v = f(p);
      const double m = std::max({std::abs(v.v), std::abs(v.d(0)), std::abs(v.d(1))});
      if (!(m <= tol))
        throw SupportViolation("test field does not vanish on the boundary at (" + std::to_string(p.x) +
                               ", " + std::to_string(p.y) + "): |f|, |grad f| up to " + std::to_string(m));
    }
  }
}

inline AdjointnessResult check_adjointness(const TestFieldSpec& spec) {
  check_support(spec.scalar, spec.a, spec.b);
  const auto qx = composite_gauss(0.0, spec.a, spec.points, spec.pieces);
  const auto qy = composite_gauss(0.0, spec.b, spec.points, spec.pieces);
  AdjointnessResult r;
  for (std::size_t j = 0; j < qy.size(); ++j)
    for (std::size_t i = 0; i < qx.size(); ++i) {
      const Point2 p{qx.points[i], qy.points[j]};
      const double w = qx.weights[i] * qy.weights[j];
      const Jet2 f = spec.scalar(p);
      const Jet2 exx = spec.tensor[0](p), eyy = spec.tensor[1](p), exy = spec.tensor[2](p);
      const double divdiv = exx.dd(0, 0) + eyy.dd(1, 1) + 2.0 * exy.dd(0, 1);
      const double lhs = divdiv * f.v;
      const double rhs = exx.v * f.dd(0, 0) + eyy.v * f.dd(1, 1) + 2.0 * exy.v * f.dd(0, 1);
      r.div_div_side += w * lhs;
      r.hessian_side += w * rhs;
      r.scale += w * (std::abs(lhs) + std::abs(rhs));
    }
  r.absolute = std::abs(r.div_div_side - r.hessian_side);
  r.residual = r.scale > 0.0 ? r.absolute / r.scale : r.absolute;
  return r;
}

// ---------------------------------------------------------------------------
// Plate Stokes-Dirac pairing
// ---------------------------------------------------------------------------

/// Co-energy fields of the plate: velocity and bending moments.
struct PlateEffortField {
  ScalarField velocity;
  ScalarField mxx, myy, mxy;

  MomentJets moments(Point2 p) const { return {mxx(p), myy(p), mxy(p)}; }
};

inline PlateEffortField zero_effort_field() {
  return {constant_field(0.0), constant_field(0.0), constant_field(0.0), constant_field(0.0)};
}

/// Flows f = -J e: (div Div M, -w_xx, -w_yy, -2 w_xy) applied to e = (v, M).
inline std::array<double, 4> plate_flow(const PlateEffortField& e, Point2 p) {
  const Jet2 v = e.velocity(p), xx = e.mxx(p), yy = e.myy(p), xy = e.mxy(p);
  return {xx.dd(0, 0) + yy.dd(1, 1) + 2.0 * xy.dd(0, 1), -v.dd(0, 0), -v.dd(1, 1), -2.0 * v.dd(0, 1)};
}

/// <<a, b>> = int (e_a.f_b + e_b.f_a) + sum over sides of
///   int (Q~n_b v_a + Mnn_b dv_a/dn + Q~n_a v_b + Mnn_a dv_b/dn) ds
///   + [M_ns,a v_b + M_ns,b v_a] between the side end points.
/// Interior, boundary and corner parts are reported separately.
inline PairingResult check_plate_pairing(const PlateEffortField& ea, const PlateEffortField& eb, double a,
                                         double b, int points = 10, int pieces = 4) {
  PairingResult r;
  const auto qx = composite_gauss(0.0, a, points, pieces);
  const auto qy = composite_gauss(0.0, b, points, pieces);
  for (std::size_t j = 0; j < qy.size(); ++j)
    for (std::size_t i = 0; i < qx.size(); ++i) {
      const Point2 p{qx.points[i], qy.points[j]};
      const double w = qx.weights[i] * qy.weights[j];
      const auto fa = plate_flow(ea, p), fb = plate_flow(eb, p);
      const std::array<double, 4> va{ea.velocity(p).v, ea.mxx(p).v, ea.myy(p).v, ea.mxy(p).v};
      const std::array<double, 4> vb{eb.velocity(p).v, eb.mxx(p).v, eb.myy(p).v, eb.mxy(p).v};
      double t1 = 0.0, t2 = 0.0;
      for (int c = 0; c < 4; ++c) {
        t1 += va[c] * fb[c];
        t2 += vb[c] * fa[c];
      }
      r.interior += w * (t1 + t2);
      r.scale += w * (std::abs(t1) + std::abs(t2));
    }
  const Mesh2D domain(a, b, 1, 1);
  for (const auto& edge : domain.boundary_edges()) {
    const auto q = composite_gauss(0.0, 1.0, points, pieces);
    const double nx = edge.normal[0], ny = edge.normal[1];
    auto dn = [&](const Jet2& j) { return nx * j.d(0) + ny * j.d(1); };
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Point2 p = edge.at(q.points[k]);
      const double w = q.weights[k] * edge.length;
      const auto za = boundary_quantities(ea.moments(p), edge.normal);
      const auto zb = boundary_quantities(eb.moments(p), edge.normal);
      const Jet2 va = ea.velocity(p), vb = eb.velocity(p);
      const double t1 = zb.effective_shear * va.v + zb.flexural * dn(va);
      const double t2 = za.effective_shear * vb.v + za.flexural * dn(vb);
      r.boundary += w * (t1 + t2);
      r.scale += w * (std::abs(t1) + std::abs(t2));
    }
    for (const auto& [t, sign] : {std::pair{0.0, -1.0}, std::pair{1.0, 1.0}}) {
      const Point2 p = edge.at(t);
      const double c = boundary_quantities(ea.moments(p), edge.normal).torsional * eb.velocity(p).v +
                       boundary_quantities(eb.moments(p), edge.normal).torsional * ea.velocity(p).v;
      r.corners += sign * c;
      r.scale += std::abs(c);
    }
  }
  r.residual = r.interior + r.boundary + r.corners;
  return r;
}

// ---------------------------------------------------------------------------
// Boundary operator B_partial
// ---------------------------------------------------------------------------

/// Side containing a boundary point of [0, a] x [0, b]; corners and interior
/// points are rejected (no unique outward normal there).
inline Side boundary_side(Point2 p, double a, double b) {
  const double tol = 1e-12 * std::max(a, b);
  const bool on_x0 = std::abs(p.x) <= tol, on_x1 = std::abs(p.x - a) <= tol;
  const bool on_y0 = std::abs(p.y) <= tol, on_y1 = std::abs(p.y - b) <= tol;
  const bool inside_x = p.x > -tol && p.x < a + tol, inside_y = p.y > -tol && p.y < b + tol;
  const int hits = int(on_x0) + int(on_x1) + int(on_y0) + int(on_y1);
  if (hits != 1 || !inside_x || !inside_y)
    throw std::invalid_argument("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                ") is not on the boundary (corners have no unique normal)");
  if (on_y0) return Side::bottom;
  if (on_x1) return Side::right;
  if (on_y1) return Side::top;
  return Side::left;
}

struct BpartialCheck {
  std::array<double, 4> matrix_form{};    // (Q~_n, v, M_nn, dv/dn) from the operator matrices
  std::array<double, 4> quantity_form{};  // same from boundary_quantities
  double max_difference = 0.0;
};

/// z = B_partial(e) for e = (v, M_xx, M_yy, M_xy) at a boundary point:
///   z = A0 e - Ax de/dx - Ay de/dy + An de/dn - As de/ds
/// with the 4x4 coefficient matrices of the boundary operator.
inline BpartialCheck check_bpartial(const PlateEffortField& e, Point2 p, double a, double b) {
  const Side side = boundary_side(p, a, b);
  const auto n = Mesh2D::outward_normal(side);
  const double nx = n[0], ny = n[1], sx = -ny, sy = nx;
  using M4 = std::array<std::array<double, 4>, 4>;
  const M4 a0{{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, nx * nx, ny * ny, 2 * nx * ny}, {0, 0, 0, 0}}};
  const M4 ax{{{0, nx, 0, ny}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
  const M4 ay{{{0, 0, ny, nx}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
  const M4 an{{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}}};
  const M4 as{{{0, -nx * ny, nx * ny, nx * nx - ny * ny}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
  const std::array<Jet2, 4> j{e.velocity(p), e.mxx(p), e.myy(p), e.mxy(p)};
  BpartialCheck out;
  for (int r = 0; r < 4; ++r) {
    double z = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double dx = j[c].d(0), dy = j[c].d(1);
      z += a0[r][c] * j[c].v - ax[r][c] * dx - ay[r][c] * dy + an[r][c] * (nx * dx + ny * dy) -
           as[r][c] * (sx * dx + sy * dy);
    }
    out.matrix_form[r] = z;
  }
  const auto q = boundary_quantities(e.moments(p), n);
  out.quantity_form = {q.effective_shear, j[0].v, q.flexural, nx * j[0].d(0) + ny * j[0].d(1)};
  for (int r = 0; r < 4; ++r)
    out.max_difference = std::max(out.max_difference, std::abs(out.matrix_form[r] - out.quantity_form[r]));
  return out;
}

}  // namespace phplate
