#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phplate/basis.hpp"
#include "phplate/beam.hpp"
#include "phplate/jet.hpp"
#include "phplate/material.hpp"
#include "phplate/mesh.hpp"
#include "phplate/phsys.hpp"
#include "phplate/quadrature.hpp"
#include "phplate/sparse.hpp"

namespace phplate {

/// Space shared by the three moment/curvature fields.
///  dq3: discontinuous bicubic (contains the Hessian of every BFS function,
///       so the reduced stiffness equals the direct bending stiffness).
///  q2:  continuous biquadratic Lagrange.
///  bfs: Bogner-Fox-Schmit (required by the kinematic variant).
enum class CurvatureSpace { dq3, q2, bfs };

inline std::string_view to_string(CurvatureSpace c) {
  switch (c) {
    case CurvatureSpace::dq3: return "dq3";
    case CurvatureSpace::q2: return "q2";
    case CurvatureSpace::bfs: return "bfs";
  }
  return "?";
}

inline FieldSpacePtr make_curvature_space(const Mesh2D& mesh, CurvatureSpace c) {
  switch (c) {
    case CurvatureSpace::dq3: return make_lagrange_space(mesh, 3, Continuity::discontinuous);
    case CurvatureSpace::q2: return make_lagrange_space(mesh, 2, Continuity::c0);
    case CurvatureSpace::bfs: return make_bfs_space(mesh);
  }
  throw std::invalid_argument("unknown curvature space");
}

/// Numbering of the boundary input coefficients. Each side carries its own
/// 1D Hermite cubic space along s (value and d/ds per side node), sides in
/// the order bottom, right, top, left. Input vector: [u1 | u2], each of
/// length size().
class BoundaryTraceLayout {
 public:
  explicit BoundaryTraceLayout(const Mesh2D& mesh) {
    int off = 0;
    for (Side s : all_sides) {
      offsets_[static_cast<int>(s)] = off;
      nodes_[static_cast<int>(s)] = mesh.side_elements(s) + 1;
      off += 2 * nodes_[static_cast<int>(s)];
    }
    size_ = off;
  }

  int size() const { return size_; }
  int side_nodes(Side s) const { return nodes_[static_cast<int>(s)]; }
  /// Coefficient index inside one trace block; slope = 0 for the value.
  int index(Side s, int k, int slope) const {
    if (k < 0 || k >= side_nodes(s)) throw std::out_of_range("BoundaryTraceLayout: node outside side");
    return offsets_[static_cast<int>(s)] + 2 * k + slope;
  }
  Side side_of(int index) const {
    for (int s = 3; s >= 0; --s)
      if (index >= offsets_[s]) return static_cast<Side>(s);
    throw std::out_of_range("BoundaryTraceLayout: index");
  }

 private:
  std::array<int, 4> offsets_{};
  std::array<int, 4> nodes_{};
  int size_ = 0;
};

/// Kirchhoff plate in port-Hamiltonian form (PFEM on a rectangle).
///
/// Blocks "w", "kxx", "kyy", "kxy" (momentum and the curvature components
/// with kxy = 2 w_xy). Interconnection
///   [[0, -Dxx^T, -Dyy^T, -2 Dxy^T], [Dxx, 0..], [Dyy, 0..], [2 Dxy, 0..]].
/// Force variant: inputs (effective shear, flexural moment) act on "w".
/// Kinematic variant: inputs (velocity, normal-derivative velocity) act on
/// the curvature blocks and Dxx = int d2v/dx2 phi_1 etc.
struct PlatePhSystem {
  Mesh2D mesh;
  MaterialParams params;
  ControlVariant variant;
  FieldSpacePtr deflection;  // field 1
  FieldSpacePtr curvature;   // fields 2-4
  SparseMatrix m1, mc;
  SparseMatrix dxx, dyy, dxy;
  SparseMatrix b1, b2;  // rows of the block the inputs act on
  BoundaryTraceLayout traces;
  SparseMatrix trace_map;        // BFS coefficients -> [psi1 | psi2] coefficients
  SparseMatrix boundary_mass;    // Hermite mass of one trace block
  AssembledPhSystem system;

  int n1() const { return deflection->dofs(); }
  int nc() const { return curvature->dofs(); }
  int input_column(int kind, Side s, int k, int slope) const {
    return kind * traces.size() + traces.index(s, k, slope);
  }
};

namespace detail {

enum class Op { value, dx, dy, dxx, dyy, dxy };

inline const Eigen::VectorXd& pick(const ShapeValues& s, Op op) {
  switch (op) {
    case Op::value: return s.v;
    case Op::dx: return s.dx;
    case Op::dy: return s.dy;
    case Op::dxx: return s.dxx;
    case Op::dyy: return s.dyy;
    case Op::dxy: return s.dxy;
  }
  return s.v;
}

/// Tensor Gauss rule on the reference square with shapes of both spaces
/// (uniform mesh: the shapes do not depend on the element).
struct ElementRule {
  std::vector<double> weights;
  std::vector<ShapeValues> test, trial;
};

inline ElementRule element_rule(const FieldSpace& test, const FieldSpace& trial, int points) {
  const auto g = gauss_legendre(points);
  const double area = test.mesh().hx() * test.mesh().hy();
  ElementRule r;
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      r.weights.push_back(g.weights[i] * g.weights[j] * area);
      r.test.push_back(test.evaluate(0, g.points[i], g.points[j]));
      r.trial.push_back(trial.evaluate(0, g.points[i], g.points[j]));
    }
  return r;
}

inline SparseMatrix assemble_bilinear(const FieldSpace& test, Op a, const FieldSpace& trial, Op b,
                                      int points = 4) {
  const ElementRule rule = element_rule(test, trial, points);
  const int nt = test.dofs_per_element(), nr = trial.dofs_per_element();
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nt, nr);
  for (std::size_t q = 0; q < rule.weights.size(); ++q)
    local += rule.weights[q] * pick(rule.test[q], a) * pick(rule.trial[q], b).transpose();
  Triplets t;
  t.reserve(static_cast<std::size_t>(test.mesh().elements()) * nt * nr);
  for (int e = 0; e < test.mesh().elements(); ++e) {
    const auto rows = test.element_dofs(e), cols = trial.element_dofs(e);
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nr; ++j)
        if (local(i, j) != 0.0) t.emplace_back(rows[i], cols[j], local(i, j));
  }
  return from_triplets(test.dofs(), trial.dofs(), t);
}

inline Eigen::VectorXd assemble_load(const FieldSpace& space, const std::function<double(Point2)>& f,
                                     int points = 5) {
  const auto g = gauss_legendre(points);
  const Mesh2D& mesh = space.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
  for (int e = 0; e < mesh.elements(); ++e) {
    const Point2 o = mesh.element_origin(e);
    const auto dofs = space.element_dofs(e);
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t i = 0; i < g.size(); ++i) {
        const ShapeValues s = space.evaluate(e, g.points[i], g.points[j]);
        const double w = g.weights[i] * g.weights[j] * mesh.hx() * mesh.hy();
        const double fv = f({o.x + g.points[i] * mesh.hx(), o.y + g.points[j] * mesh.hy()});
        for (std::size_t l = 0; l < dofs.size(); ++l) out[dofs[l]] += w * fv * s.v[l];
      }
  }
  return out;
}

/// Reference coordinates of a point of a boundary edge inside its element.
inline std::array<double, 2> edge_reference(const Mesh2D& mesh, const BoundaryEdge& edge, double t) {
  const Point2 p = edge.at(t), o = mesh.element_origin(edge.element);
  return {(p.x - o.x) / mesh.hx(), (p.y - o.y) / mesh.hy()};
}

inline void require_bfs(const FieldSpace& space, const char* who) {
  if (dynamic_cast<const BfsSpace*>(&space) == nullptr)
    throw std::invalid_argument(std::string(who) +
                                ": field requires the C1 (BFS) space with second derivatives");
}

/// Maps BFS nodal dofs to the boundary trace coefficients of w and dw/dn.
inline SparseMatrix bfs_trace_map(const Mesh2D& mesh, const BoundaryTraceLayout& layout) {
  Triplets t;
  const int nb = layout.size();
  for (Side s : all_sides) {
    // (BFS dof, sign) for: psi1 value, psi1 slope, psi2 value, psi2 slope
    std::array<std::pair<int, double>, 4> map{};
    switch (s) {
      case Side::bottom:
        map = {{{BfsSpace::value, 1.0}, {BfsSpace::dx, 1.0}, {BfsSpace::dy, -1.0}, {BfsSpace::dxy, -1.0}}};
        break;
      case Side::right:
        map = {{{BfsSpace::value, 1.0}, {BfsSpace::dy, 1.0}, {BfsSpace::dx, 1.0}, {BfsSpace::dxy, 1.0}}};
        break;
      case Side::top:
        map = {{{BfsSpace::value, 1.0}, {BfsSpace::dx, -1.0}, {BfsSpace::dy, 1.0}, {BfsSpace::dxy, -1.0}}};
        break;
      case Side::left:
        map = {{{BfsSpace::value, 1.0}, {BfsSpace::dy, -1.0}, {BfsSpace::dx, -1.0}, {BfsSpace::dxy, 1.0}}};
        break;
    }
    for (int k = 0; k < layout.side_nodes(s); ++k) {
      const auto [i, j] = mesh.side_node(s, k);
      const int node = mesh.node_index(i, j);
      for (int c = 0; c < 4; ++c) {
        const int row = (c / 2) * nb + layout.index(s, k, c % 2);
        t.emplace_back(row, 4 * node + map[c].first, map[c].second);
      }
    }
  }
  return from_triplets(2 * nb, 4 * mesh.nodes(), t);
}

/// Hermite mass matrix of one trace block (block diagonal over sides).
inline SparseMatrix trace_mass(const Mesh2D& mesh, const BoundaryTraceLayout& layout) {
  const auto g = gauss_legendre(4);
  Triplets t;
  for (const auto& edge : mesh.boundary_edges()) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      const auto psi = hermite_cubic(g.points[q], edge.length);
      const double w = g.weights[q] * edge.length;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          t.emplace_back(layout.index(edge.side, edge.index_on_side + a / 2, a % 2),
                         layout.index(edge.side, edge.index_on_side + b / 2, b % 2),
                         w * psi[0][a] * psi[0][b]);
    }
  }
  return from_triplets(layout.size(), layout.size(), t);
}

inline std::vector<std::string> trace_labels(const Mesh2D& mesh, const BoundaryTraceLayout& layout,
                                             const char* u1, const char* u2) {
  std::vector<std::string> out(2 * layout.size());
  for (int kind = 0; kind < 2; ++kind)
    for (Side s : all_sides)
      for (int k = 0; k < layout.side_nodes(s); ++k)
        for (int slope = 0; slope < 2; ++slope)
          out[kind * layout.size() + layout.index(s, k, slope)] =
              std::string(kind == 0 ? u1 : u2) + ":" + std::string(to_string(s)) + ":" +
              std::to_string(k) + (slope ? ":slope" : ":value");
  (void)mesh;
  return out;
}

inline SparseMatrix plate_energy(const SparseMatrix& m1, const SparseMatrix& mc, const MaterialParams& p) {
  const int n1 = static_cast<int>(m1.rows()), nc = static_cast<int>(mc.rows());
  const BendingMatrix d = bending_matrix(p);
  Triplets t;
  append_block(t, m1, 0, 0, 1.0 / p.surface_density);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (d(a, b) != 0.0) append_block(t, mc, n1 + a * nc, n1 + b * nc, d(a, b));
  return from_triplets(n1 + 3 * nc, n1 + 3 * nc, t);
}

inline SparseMatrix plate_mass(const SparseMatrix& m1, const SparseMatrix& mc) {
  const int n1 = static_cast<int>(m1.rows()), nc = static_cast<int>(mc.rows());
  Triplets t;
  append_block(t, m1, 0, 0);
  for (int a = 0; a < 3; ++a) append_block(t, mc, n1 + a * nc, n1 + a * nc);
  return from_triplets(n1 + 3 * nc, n1 + 3 * nc, t);
}

inline SparseMatrix plate_interconnection(const SparseMatrix& dxx, const SparseMatrix& dyy,
                                          const SparseMatrix& dxy) {
  const int n1 = static_cast<int>(dxx.cols()), nc = static_cast<int>(dxx.rows());
  // every entry of the upper block is the negated copy of the lower one
  Triplets t;
  const std::array<std::pair<const SparseMatrix*, double>, 3> blocks{
      {{&dxx, 1.0}, {&dyy, 1.0}, {&dxy, 2.0}}};
  for (int b = 0; b < 3; ++b) {
    const SparseMatrix& m = *blocks[b].first;
    const double f = blocks[b].second;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        const double v = f * it.value();
        t.emplace_back(n1 + b * nc + it.row(), it.col(), v);
        t.emplace_back(it.col(), n1 + b * nc + it.row(), -v);
      }
  }
  return from_triplets(n1 + 3 * nc, n1 + 3 * nc, t);
}

inline BlockLayout plate_layout(int n1, int nc) {
  return BlockLayout({"w", "kxx", "kyy", "kxy"}, {n1, nc, nc, nc});
}

}  // namespace detail

/// Force (momentum) control: the momentum equation is integrated by parts
/// twice; u1 = effective shear Q~_n, u2 = flexural moment M_nn.
inline PlatePhSystem assemble_plate_force_control(FieldSpacePtr deflection, FieldSpacePtr curvature,
                                                  const MaterialParams& p) {
  p.validate();
  detail::require_bfs(*deflection, "assemble_plate_force_control");
  using detail::Op;
  const Mesh2D& mesh = deflection->mesh();
  const FieldSpace& f1 = *deflection;
  const FieldSpace& fc = *curvature;

  SparseMatrix m1 = detail::assemble_bilinear(f1, Op::value, f1, Op::value);
  SparseMatrix mc = detail::assemble_bilinear(fc, Op::value, fc, Op::value);
  SparseMatrix dxx = detail::assemble_bilinear(fc, Op::value, f1, Op::dxx);
  SparseMatrix dyy = detail::assemble_bilinear(fc, Op::value, f1, Op::dyy);
  SparseMatrix dxy = detail::assemble_bilinear(fc, Op::value, f1, Op::dxy);

  const BoundaryTraceLayout layout(mesh);
  const int nb = layout.size();
  const auto g = gauss_legendre(4);
  Triplets t1, t2;
  for (const auto& edge : mesh.boundary_edges()) {
    const auto dofs = f1.element_dofs(edge.element);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const auto ref = detail::edge_reference(mesh, edge, g.points[q]);
      const ShapeValues s = f1.evaluate(edge.element, ref[0], ref[1]);
      const auto psi = hermite_cubic(g.points[q], edge.length);
      const double w = g.weights[q] * edge.length;
      for (std::size_t l = 0; l < dofs.size(); ++l) {
        const double dn = edge.normal[0] * s.dx[l] + edge.normal[1] * s.dy[l];
        for (int a = 0; a < 4; ++a) {
          const int col = layout.index(edge.side, edge.index_on_side + a / 2, a % 2);
          if (s.v[l] != 0.0) t1.emplace_back(dofs[l], col, w * s.v[l] * psi[0][a]);
          if (dn != 0.0) t2.emplace_back(dofs[l], col, w * dn * psi[0][a]);
        }
      }
    }
  }
  SparseMatrix b1 = from_triplets(f1.dofs(), nb, t1);
  SparseMatrix b2 = from_triplets(f1.dofs(), nb, t2);

  const int n1 = f1.dofs(), nc = fc.dofs(), n = n1 + 3 * nc;
  Triplets bt;
  append_block(bt, b1, 0, 0);
  append_block(bt, b2, 0, nb);
  AssembledPhSystem sys(detail::plate_layout(n1, nc), detail::plate_mass(m1, mc),
                        detail::plate_interconnection(dxx, dyy, dxy), detail::plate_energy(m1, mc, p),
                        from_triplets(n, 2 * nb, bt),
                        detail::trace_labels(mesh, layout, "shear", "moment"));
  return PlatePhSystem{mesh, p, ControlVariant::force, std::move(deflection), std::move(curvature),
                       std::move(m1), std::move(mc), std::move(dxx), std::move(dyy), std::move(dxy),
                       std::move(b1), std::move(b2), layout, detail::bfs_trace_map(mesh, layout),
                       detail::trace_mass(mesh, layout), std::move(sys)};
}

inline PlatePhSystem assemble_plate_force_control(const Mesh2D& mesh, const MaterialParams& p,
                                                  CurvatureSpace c = CurvatureSpace::dq3) {
  return assemble_plate_force_control(make_bfs_space(mesh), make_curvature_space(mesh, c), p);
}

/// Kinematic control: the curvature equations are integrated by parts twice;
/// u1 = e_w, u2 = de_w/dn on the boundary, outputs (Q~_n, M_nn) of the
/// moment efforts. Corner contributions [(s^T V n) e_w] of each side are
/// included in the u1 columns.
inline PlatePhSystem assemble_plate_kinematic_control(FieldSpacePtr deflection, FieldSpacePtr curvature,
                                                      const MaterialParams& p) {
  p.validate();
  detail::require_bfs(*deflection, "assemble_plate_kinematic_control");
  detail::require_bfs(*curvature, "assemble_plate_kinematic_control");
  using detail::Op;
  const Mesh2D& mesh = deflection->mesh();
  const FieldSpace& f1 = *deflection;
  const FieldSpace& fc = *curvature;

  SparseMatrix m1 = detail::assemble_bilinear(f1, Op::value, f1, Op::value);
  SparseMatrix mc = detail::assemble_bilinear(fc, Op::value, fc, Op::value);
  SparseMatrix dxx = detail::assemble_bilinear(fc, Op::dxx, f1, Op::value);
  SparseMatrix dyy = detail::assemble_bilinear(fc, Op::dyy, f1, Op::value);
  SparseMatrix dxy = detail::assemble_bilinear(fc, Op::dxy, f1, Op::value);

  const BoundaryTraceLayout layout(mesh);
  const int nb = layout.size();
  const int n1 = f1.dofs(), nc = fc.dofs(), n = n1 + 3 * nc;
  const auto g = gauss_legendre(4);
  Triplets bt;
  // Boundary functionals of the three unit tensors V2 = e_x e_x^T,
  // V3 = e_y e_y^T, V4 = e_x e_y^T + e_y e_x^T applied to a test function v.
  struct Functionals {
    double mnn, qtn, sn;
  };
  auto functionals = [](const BoundaryEdge& edge, int field, double v, double vx, double vy) {
    const double nx = edge.normal[0], ny = edge.normal[1];
    const double sx = edge.tangent[0], sy = edge.tangent[1];
    const double vs = sx * vx + sy * vy;
    Functionals f{};
    if (field == 0) {
      f = {v * nx * nx, -vx * nx, -nx * ny * v};
      f.qtn -= -nx * ny * vs;
    } else if (field == 1) {
      f = {v * ny * ny, -vy * ny, nx * ny * v};
      f.qtn -= nx * ny * vs;
    } else {
      f = {2.0 * v * nx * ny, -(vy * nx + vx * ny), (nx * nx - ny * ny) * v};
      f.qtn -= (nx * nx - ny * ny) * vs;
    }
    return f;
  };
  for (const auto& edge : mesh.boundary_edges()) {
    const auto dofs = fc.element_dofs(edge.element);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const auto ref = detail::edge_reference(mesh, edge, g.points[q]);
      const ShapeValues s = fc.evaluate(edge.element, ref[0], ref[1]);
      const auto psi = hermite_cubic(g.points[q], edge.length);
      const double w = g.weights[q] * edge.length;
      for (int field = 0; field < 3; ++field)
        for (std::size_t l = 0; l < dofs.size(); ++l) {
          const Functionals f = functionals(edge, field, s.v[l], s.dx[l], s.dy[l]);
          const int row = n1 + field * nc + dofs[l];
          for (int a = 0; a < 4; ++a) {
            const int col = layout.index(edge.side, edge.index_on_side + a / 2, a % 2);
            if (f.qtn != 0.0) bt.emplace_back(row, col, w * f.qtn * psi[0][a]);
            if (f.mnn != 0.0) bt.emplace_back(row, nb + col, w * f.mnn * psi[0][a]);
          }
        }
    }
  }
  for (Side side : all_sides) {
    const auto edges = mesh.side_edges(side);
    const std::array<std::pair<const BoundaryEdge*, double>, 2> ends{
        {{&edges.front(), 0.0}, {&edges.back(), 1.0}}};
    for (const auto& [edge, t] : ends) {
      const double sign = t == 0.0 ? -1.0 : 1.0;
      const int col = layout.index(side, t == 0.0 ? 0 : layout.side_nodes(side) - 1, 0);
      const auto ref = detail::edge_reference(mesh, *edge, t);
      const ShapeValues s = fc.evaluate(edge->element, ref[0], ref[1]);
      const auto dofs = fc.element_dofs(edge->element);
      for (int field = 0; field < 3; ++field)
        for (std::size_t l = 0; l < dofs.size(); ++l) {
          const double sn = functionals(*edge, field, s.v[l], s.dx[l], s.dy[l]).sn;
          if (sn != 0.0) bt.emplace_back(n1 + field * nc + dofs[l], col, sign * sn);
        }
    }
  }
  SparseMatrix b = from_triplets(n, 2 * nb, bt);
  SparseMatrix b1 = b.middleCols(0, nb), b2 = b.middleCols(nb, nb);

  AssembledPhSystem sys(detail::plate_layout(n1, nc), detail::plate_mass(m1, mc),
                        detail::plate_interconnection(dxx, dyy, dxy), detail::plate_energy(m1, mc, p),
                        b, detail::trace_labels(mesh, layout, "velocity", "normal_velocity"));
  return PlatePhSystem{mesh, p, ControlVariant::kinematic, std::move(deflection), std::move(curvature),
                       std::move(m1), std::move(mc), std::move(dxx), std::move(dyy), std::move(dxy),
                       std::move(b1), std::move(b2), layout, detail::bfs_trace_map(mesh, layout),
                       detail::trace_mass(mesh, layout), std::move(sys)};
}

inline PlatePhSystem assemble_plate_kinematic_control(const Mesh2D& mesh, const MaterialParams& p) {
  return assemble_plate_kinematic_control(make_bfs_space(mesh), make_bfs_space(mesh), p);
}

inline PlatePhSystem assemble_plate(const Mesh2D& mesh, const MaterialParams& p, ControlVariant v,
                                    CurvatureSpace c = CurvatureSpace::dq3) {
  return v == ControlVariant::force ? assemble_plate_force_control(mesh, p, c)
                                    : assemble_plate_kinematic_control(mesh, p);
}

/// Resistive port on the velocity block with S = r M_1, dissipating
/// int r e_1^2 dA.
inline PlatePhSystem attach_damping(PlatePhSystem plate, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("attach_damping: damping must be >= 0");
  plate.params.damping = r;
  if (r > 0.0) plate.system = attach_block_damping(plate.system, 0, SparseMatrix(r * plate.m1));
  return plate;
}

/// Appends an input column int phi_1 f_d dA on the momentum block; drive it
/// with u = 1 to apply the load density f_d.
inline PlatePhSystem attach_distributed_load(PlatePhSystem plate, const std::function<double(Point2)>& f,
                                             std::string label = "load") {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(plate.system.size());
  col.head(plate.n1()) = detail::assemble_load(*plate.deflection, f);
  plate.system = plate.system.with_appended_input(col, std::move(label));
  return plate;
}

/// Dof indices of the deflection space at the nodes of one side.
inline std::vector<int> side_dofs(const PlatePhSystem& plate, Side s, std::vector<int> which) {
  std::vector<int> out;
  const int nodes = plate.mesh.side_elements(s) + 1;
  for (int k = 0; k < nodes; ++k) {
    const auto [i, j] = plate.mesh.side_node(s, k);
    for (int c : which) out.push_back(4 * plate.mesh.node_index(i, j) + c);
  }
  return out;
}

/// Boundary conditions per side (indexed by Side). Force variant: clamped
/// eliminates every nodal dof of the side, simply supported eliminates the
/// value and tangential derivative, free leaves the side unconstrained.
/// Kinematic variant: clamped and input_signal only. Input columns survive
/// on input_signal sides and for non-boundary inputs (loads).
inline ConstrainedSystem apply_plate_conditions(const PlatePhSystem& plate,
                                                const std::array<BoundaryCondition, 4>& bc) {
  std::vector<int> removed;
  for (Side s : all_sides) {
    const BoundaryCondition c = bc[static_cast<int>(s)];
    if (plate.variant == ControlVariant::force) {
      const bool horizontal = s == Side::bottom || s == Side::top;
      std::vector<int> dofs;
      if (c == BoundaryCondition::clamped)
        dofs = side_dofs(plate, s, {BfsSpace::value, BfsSpace::dx, BfsSpace::dy, BfsSpace::dxy});
      if (c == BoundaryCondition::simply_supported)
        dofs = side_dofs(plate, s, {BfsSpace::value, horizontal ? BfsSpace::dx : BfsSpace::dy});
      removed.insert(removed.end(), dofs.begin(), dofs.end());
    } else if (c == BoundaryCondition::free || c == BoundaryCondition::simply_supported) {
      throw std::invalid_argument("kinematic plate: side '" + std::string(to_string(s)) +
                                  "' must be clamped or input_signal");
    }
  }
  const int nb = plate.traces.size();
  return constrain(plate.system, removed, [&](int c) {
    if (c >= 2 * nb) return true;
    return bc[static_cast<int>(plate.traces.side_of(c % nb))] == BoundaryCondition::input;
  });
}

// ---------------------------------------------------------------------------
// Boundary quantities
// ---------------------------------------------------------------------------

/// Moment field (M_xx, M_yy, M_xy) with derivatives at a point.
struct MomentJets {
  Jet2 xx, yy, xy;
};

struct BoundaryQuantities {
  double shear = 0.0;            // Q_n
  double flexural = 0.0;         // M_nn
  double torsional = 0.0;        // M_ns
  double effective_shear = 0.0;  // Q~_n = Q_n - dM_ns/ds
};

/// Q_x = -dMxx/dx - dMxy/dy, Q_y = -dMyy/dy - dMxy/dx, Q_n = n.Q,
/// M_nn = n^T M n, M_ns = s^T M n with s = (-n_y, n_x).
inline BoundaryQuantities boundary_quantities(const MomentJets& m, std::array<double, 2> n) {
  const double nx = n[0], ny = n[1], sx = -ny, sy = nx;
  const double qx = -m.xx.d(0) - m.xy.d(1);
  const double qy = -m.yy.d(1) - m.xy.d(0);
  auto tensor = [&](double a, double b, double c) {  // s^T [[a, c], [c, b]] n
    return sx * (a * nx + c * ny) + sy * (c * nx + b * ny);
  };
  BoundaryQuantities out;
  out.shear = nx * qx + ny * qy;
  out.flexural = nx * (m.xx.v * nx + m.xy.v * ny) + ny * (m.xy.v * nx + m.yy.v * ny);
  out.torsional = tensor(m.xx.v, m.yy.v, m.xy.v);
  auto ds = [&](const Jet2& j) { return sx * j.d(0) + sy * j.d(1); };
  out.effective_shear = out.shear - tensor(ds(m.xx), ds(m.yy), ds(m.xy));
  return out;
}

/// Boundary quantities at parameter t in [0, 1] along boundary edge `edge_id`.
inline BoundaryQuantities boundary_quantities(const Mesh2D& mesh, int edge_id, double t,
                                              const std::function<MomentJets(Point2)>& moments) {
  const BoundaryEdge& edge = mesh.boundary_edge(edge_id);
  return boundary_quantities(moments(edge.at(t)), edge.normal);
}

}  // namespace phplate
