#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phplate {

/// Uniform mesh of [0, L] with `elements` Hermite intervals.
class Mesh1D {
 public:
  Mesh1D(double length, int elements) : length_(length), elements_(elements) {
    if (!(length > 0.0)) throw std::invalid_argument("Mesh1D: length must be > 0");
    if (elements < 1) throw std::invalid_argument("Mesh1D: need at least one element");
  }

  double length() const { return length_; }
  int elements() const { return elements_; }
  int nodes() const { return elements_ + 1; }
  double h() const { return length_ / elements_; }
  double node(int i) const { return i == elements_ ? length_ : i * h(); }

  /// Element containing x (the left one at interior nodes).
  int locate(double x) const {
    int e = static_cast<int>(std::floor(x / h()));
    if (e < 0) e = 0;
    if (e >= elements_) e = elements_ - 1;
    return e;
  }

 private:
  double length_;
  int elements_;
};

enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

inline constexpr std::array<Side, 4> all_sides{Side::bottom, Side::right, Side::top, Side::left};

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// One element edge on the rectangle boundary, oriented along s = (-n_y, n_x).
struct BoundaryEdge {
  int id = 0;
  Side side = Side::bottom;
  int element = 0;
  int index_on_side = 0;  // position along s, 0 at the side start
  Point2 start;
  Point2 end;
  std::array<double, 2> normal{};
  std::array<double, 2> tangent{};
  double length = 0.0;

  Point2 at(double t) const {
    return {start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)};
  }
};

/// Structured rectangular mesh of [0, a] x [0, b].
///
/// Nodes are numbered row by row (x fastest), elements likewise. Each side is
/// traversed counterclockwise, i.e. along the tangent s = (-n_y, n_x).
class Mesh2D {
 public:
  Mesh2D(double a, double b, int nx, int ny) : a_(a), b_(b), nx_(nx), ny_(ny) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("Mesh2D: dimensions must be > 0");
    if (nx < 1 || ny < 1) throw std::invalid_argument("Mesh2D: need at least one element per direction");
    build_boundary();
  }

  double a() const { return a_; }
  double b() const { return b_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return a_ / nx_; }
  double hy() const { return b_ / ny_; }
  int elements() const { return nx_ * ny_; }
  int nodes() const { return (nx_ + 1) * (ny_ + 1); }
  double area() const { return a_ * b_; }

  int node_index(int i, int j) const { return j * (nx_ + 1) + i; }
  Point2 node(int i, int j) const {
    return {i == nx_ ? a_ : i * hx(), j == ny_ ? b_ : j * hy()};
  }
  int element_index(int ex, int ey) const { return ey * nx_ + ex; }
  std::array<int, 2> element_coords(int e) const { return {e % nx_, e / nx_}; }
  Point2 element_origin(int e) const {
    const auto [ex, ey] = element_coords(e);
    return {ex * hx(), ey * hy()};
  }
  /// Corner nodes of an element: (0,0), (1,0), (0,1), (1,1) in local order.
  std::array<int, 4> element_nodes(int e) const {
    const auto [ex, ey] = element_coords(e);
    return {node_index(ex, ey), node_index(ex + 1, ey), node_index(ex, ey + 1),
            node_index(ex + 1, ey + 1)};
  }

  int locate(Point2 p) const {
    int ex = static_cast<int>(std::floor(p.x / hx()));
    int ey = static_cast<int>(std::floor(p.y / hy()));
    ex = ex < 0 ? 0 : (ex >= nx_ ? nx_ - 1 : ex);
    ey = ey < 0 ? 0 : (ey >= ny_ ? ny_ - 1 : ey);
    return element_index(ex, ey);
  }

  const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }
  const BoundaryEdge& boundary_edge(int id) const {
    if (id < 0 || id >= static_cast<int>(edges_.size()))
      throw std::out_of_range("Mesh2D: edge " + std::to_string(id) + " is not a boundary edge");
    return edges_[id];
  }
  /// Edges of one side in traversal order.
  std::vector<BoundaryEdge> side_edges(Side s) const {
    std::vector<BoundaryEdge> out;
    for (const auto& e : edges_)
      if (e.side == s) out.push_back(e);
    return out;
  }
  int side_elements(Side s) const {
    return (s == Side::bottom || s == Side::top) ? nx_ : ny_;
  }
  double side_length(Side s) const {
    return (s == Side::bottom || s == Side::top) ? a_ : b_;
  }
  static std::array<double, 2> outward_normal(Side s) {
    switch (s) {
      case Side::bottom: return {0.0, -1.0};
      case Side::right: return {1.0, 0.0};
      case Side::top: return {0.0, 1.0};
      case Side::left: return {-1.0, 0.0};
    }
    return {0.0, 0.0};
  }
  static std::array<double, 2> tangent(Side s) {
    const auto n = outward_normal(s);
    return {-n[1], n[0]};
  }
  /// Node (i, j) at position k along side s (k = 0 at the side start).
  std::array<int, 2> side_node(Side s, int k) const {
    switch (s) {
      case Side::bottom: return {k, 0};
      case Side::right: return {nx_, k};
      case Side::top: return {nx_ - k, ny_};
      case Side::left: return {0, ny_ - k};
    }
    return {0, 0};
  }

 private:
  void build_boundary() {
    int id = 0;
    for (Side s : all_sides) {
      const int count = side_elements(s);
      for (int k = 0; k < count; ++k) {
        const auto [i0, j0] = side_node(s, k);
        const auto [i1, j1] = side_node(s, k + 1);
        BoundaryEdge e;
        e.id = id++;
        e.side = s;
        e.index_on_side = k;
        e.start = node(i0, j0);
        e.end = node(i1, j1);
        e.normal = outward_normal(s);
        e.tangent = tangent(s);
        e.length = std::hypot(e.end.x - e.start.x, e.end.y - e.start.y);
        e.element = element_index(std::min(i0, i1) - (s == Side::right ? 1 : 0),
                                  std::min(j0, j1) - (s == Side::top ? 1 : 0));
        edges_.push_back(e);
      }
    }
  }

  double a_, b_;
  int nx_, ny_;
  std::vector<BoundaryEdge> edges_;
};

}  // namespace phplate
