#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phplate/jet.hpp"
#include "phplate/mesh.hpp"

namespace phplate {

/// Cubic Hermite shape functions on an interval of length h, local order
/// (value@0, slope@0, value@1, slope@1). Row k holds the k-th physical
/// derivative (k = 0..3) of the four functions at xi in [0, 1].
inline std::array<std::array<double, 4>, 4> hermite_cubic(double xi, double h) {
  const double x2 = xi * xi, x3 = x2 * xi;
  std::array<std::array<double, 4>, 4> n{};
  n[0] = {1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)};
  n[1] = {-6.0 * xi + 6.0 * x2, h * (1.0 - 4.0 * xi + 3.0 * x2), 6.0 * xi - 6.0 * x2,
          h * (3.0 * x2 - 2.0 * xi)};
  n[2] = {-6.0 + 12.0 * xi, h * (6.0 * xi - 4.0), 6.0 - 12.0 * xi, h * (6.0 * xi - 2.0)};
  n[3] = {12.0, 6.0 * h, -12.0, 6.0 * h};
  double scale = 1.0;
  for (int k = 1; k < 4; ++k) {
    scale /= h;
    for (auto& v : n[k]) v *= scale;
  }
  return n;
}

/// Equispaced Lagrange polynomials of degree k on [0, 1]; degree 0 is the
/// constant function.
class Lagrange1D {
 public:
  explicit Lagrange1D(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("Lagrange1D: negative degree");
    const int n = degree + 1;
    coeffs_.assign(n, std::vector<double>(n, 0.0));
    for (int m = 0; m < n; ++m) {
      std::vector<double> poly{1.0};
      const double tm = node(m);
      for (int l = 0; l < n; ++l) {
        if (l == m) continue;
        const double tl = node(l);
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t c = 0; c < poly.size(); ++c) {
          next[c + 1] += poly[c] / (tm - tl);
          next[c] -= poly[c] * tl / (tm - tl);
        }
        poly = std::move(next);
      }
      for (std::size_t c = 0; c < poly.size(); ++c) coeffs_[m][c] = poly[c];
    }
  }

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  double node(int m) const { return degree_ == 0 ? 0.5 : static_cast<double>(m) / degree_; }

  /// Derivative `order` (0..2) of function m at xi, with respect to xi.
  double eval(int m, double xi, int order) const {
    double result = 0.0, power = 1.0;
    const auto& c = coeffs_[m];
    for (int p = order; p < static_cast<int>(c.size()); ++p) {
      double factor = 1.0;
      for (int q = 0; q < order; ++q) factor *= (p - q);
      result += factor * c[p] * power;
      power *= xi;
    }
    return result;
  }

 private:
  int degree_;
  std::vector<std::vector<double>> coeffs_;
};

enum class Continuity { discontinuous, c0, c1 };

/// Local shape functions and their physical derivatives at one point.
struct ShapeValues {
  Eigen::VectorXd v, dx, dy, dxx, dyy, dxy;

  explicit ShapeValues(int n = 0)
      : v(Eigen::VectorXd::Zero(n)), dx(v), dy(v), dxx(v), dyy(v), dxy(v) {}
};

/// A scalar finite element space on a structured rectangular mesh.
class FieldSpace {
 public:
  explicit FieldSpace(Mesh2D mesh) : mesh_(std::move(mesh)) {}
  virtual ~FieldSpace() = default;

  const Mesh2D& mesh() const { return mesh_; }

  virtual int dofs() const = 0;
  virtual int dofs_per_element() const = 0;
  virtual std::vector<int> element_dofs(int e) const = 0;
  /// Shapes at reference coordinates (xi, eta) in [0, 1]^2 of element e.
  virtual ShapeValues evaluate(int e, double xi, double eta) const = 0;
  /// Polynomial degree per coordinate direction.
  virtual int degree() const = 0;
  virtual Continuity continuity() const = 0;
  virtual std::string name() const = 0;
  /// Coefficients interpolating an analytic field.
  virtual Eigen::VectorXd interpolate(const std::function<Jet2(Point2)>& f) const = 0;

  ShapeValues evaluate_at(Point2 p, int& element) const {
    element = mesh_.locate(p);
    const Point2 o = mesh_.element_origin(element);
    return evaluate(element, (p.x - o.x) / mesh_.hx(), (p.y - o.y) / mesh_.hy());
  }

 private:
  Mesh2D mesh_;
};

using FieldSpacePtr = std::shared_ptr<const FieldSpace>;

/// Bogner-Fox-Schmit bicubic rectangle: nodal dofs (w, w_x, w_y, w_xy),
/// global dof 4 * node + k. C1-conforming on structured meshes.
class BfsSpace final : public FieldSpace {
 public:
  using FieldSpace::FieldSpace;

  enum Dof { value = 0, dx = 1, dy = 2, dxy = 3 };

  int dofs() const override { return 4 * mesh().nodes(); }
  int dofs_per_element() const override { return 16; }
  int degree() const override { return 3; }
  Continuity continuity() const override { return Continuity::c1; }
  std::string name() const override { return "bfs_bicubic"; }

  std::vector<int> element_dofs(int e) const override {
    std::vector<int> out;
    out.reserve(16);
    for (int node : mesh().element_nodes(e))
      for (int k = 0; k < 4; ++k) out.push_back(4 * node + k);
    return out;
  }

  ShapeValues evaluate(int, double xi, double eta) const override {
    const auto hx = hermite_cubic(xi, mesh().hx());
    const auto hy = hermite_cubic(eta, mesh().hy());
    ShapeValues s(16);
    int idx = 0;
    for (int node = 0; node < 4; ++node) {
      const int ax = node & 1, ay = node >> 1;
      for (int k = 0; k < 4; ++k, ++idx) {
        const int fx = 2 * ax + ((k == dx || k == dxy) ? 1 : 0);
        const int fy = 2 * ay + ((k == dy || k == dxy) ? 1 : 0);
        s.v[idx] = hx[0][fx] * hy[0][fy];
        s.dx[idx] = hx[1][fx] * hy[0][fy];
        s.dy[idx] = hx[0][fx] * hy[1][fy];
        s.dxx[idx] = hx[2][fx] * hy[0][fy];
        s.dyy[idx] = hx[0][fx] * hy[2][fy];
        s.dxy[idx] = hx[1][fx] * hy[1][fy];
      }
    }
    return s;
  }

  Eigen::VectorXd interpolate(const std::function<Jet2(Point2)>& f) const override {
    Eigen::VectorXd c(dofs());
    for (int j = 0; j <= mesh().ny(); ++j)
      for (int i = 0; i <= mesh().nx(); ++i) {
        const Jet2 w = f(mesh().node(i, j));
        const int n = mesh().node_index(i, j);
        c[4 * n + value] = w.v;
        c[4 * n + dx] = w.d(0);
        c[4 * n + dy] = w.d(1);
        c[4 * n + dxy] = w.dd(0, 1);
      }
    return c;
  }
};

/// Tensor-product Lagrange space of degree k on equispaced element nodes,
/// either C0 (shared nodes) or fully discontinuous.
class LagrangeSpace final : public FieldSpace {
 public:
  LagrangeSpace(Mesh2D mesh, int degree, Continuity continuity)
      : FieldSpace(std::move(mesh)), basis_(degree), continuity_(continuity) {
    if (continuity == Continuity::c1)
      throw std::invalid_argument("LagrangeSpace: Lagrange elements are not C1");
    if (continuity == Continuity::c0 && degree < 1)
      throw std::invalid_argument("LagrangeSpace: continuous space needs degree >= 1");
  }

  int dofs() const override {
    const int k = basis_.degree();
    if (continuity_ == Continuity::c0) return (k * mesh().nx() + 1) * (k * mesh().ny() + 1);
    return mesh().elements() * dofs_per_element();
  }
  int dofs_per_element() const override { return basis_.size() * basis_.size(); }
  int degree() const override { return basis_.degree(); }
  Continuity continuity() const override { return continuity_; }
  std::string name() const override {
    return std::string(continuity_ == Continuity::c0 ? "q" : "dq") + std::to_string(degree());
  }

  std::vector<int> element_dofs(int e) const override {
    const int n = basis_.size();
    std::vector<int> out(n * n);
    if (continuity_ == Continuity::discontinuous) {
      for (int l = 0; l < n * n; ++l) out[l] = e * n * n + l;
      return out;
    }
    const int k = basis_.degree();
    const auto [ex, ey] = mesh().element_coords(e);
    const int row = k * mesh().nx() + 1;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out[j * n + i] = (ey * k + j) * row + ex * k + i;
    return out;
  }

  ShapeValues evaluate(int, double xi, double eta) const override {
    const int n = basis_.size();
    const double hx = mesh().hx(), hy = mesh().hy();
    ShapeValues s(n * n);
    for (int j = 0; j < n; ++j) {
      const double y0 = basis_.eval(j, eta, 0), y1 = basis_.eval(j, eta, 1) / hy,
                   y2 = basis_.eval(j, eta, 2) / (hy * hy);
      for (int i = 0; i < n; ++i) {
        const double x0 = basis_.eval(i, xi, 0), x1 = basis_.eval(i, xi, 1) / hx,
                     x2 = basis_.eval(i, xi, 2) / (hx * hx);
        const int l = j * n + i;
        s.v[l] = x0 * y0;
        s.dx[l] = x1 * y0;
        s.dy[l] = x0 * y1;
        s.dxx[l] = x2 * y0;
        s.dyy[l] = x0 * y2;
        s.dxy[l] = x1 * y1;
      }
    }
    return s;
  }

  Eigen::VectorXd interpolate(const std::function<Jet2(Point2)>& f) const override {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dofs());
    const int n = basis_.size();
    for (int e = 0; e < mesh().elements(); ++e) {
      const Point2 o = mesh().element_origin(e);
      const auto dofs = element_dofs(e);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          c[dofs[j * n + i]] =
              f({o.x + basis_.node(i) * mesh().hx(), o.y + basis_.node(j) * mesh().hy()}).v;
    }
    return c;
  }

 private:
  Lagrange1D basis_;
  Continuity continuity_;
};

/// Value, gradient and Hessian of a discrete field at a point. For
/// discontinuous spaces the element returned by Mesh2D::locate is used.
inline Jet2 evaluate_field(const FieldSpace& space, const Eigen::VectorXd& coeffs, Point2 p) {
  int e = 0;
  const ShapeValues s = space.evaluate_at(p, e);
  const auto dofs = space.element_dofs(e);
  Jet2 j;
  for (std::size_t l = 0; l < dofs.size(); ++l) {
    const double c = coeffs[dofs[l]];
    j.v += c * s.v[l];
    j.g[0] += c * s.dx[l];
    j.g[1] += c * s.dy[l];
    j.h[0][0] += c * s.dxx[l];
    j.h[1][1] += c * s.dyy[l];
    j.h[0][1] += c * s.dxy[l];
  }
  j.h[1][0] = j.h[0][1];
  return j;
}

inline FieldSpacePtr make_bfs_space(const Mesh2D& mesh) { return std::make_shared<BfsSpace>(mesh); }

inline FieldSpacePtr make_lagrange_space(const Mesh2D& mesh, int degree, Continuity c) {
  return std::make_shared<LagrangeSpace>(mesh, degree, c);
}

}  // namespace phplate
