#pragma once

#include <algorithm>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "phplate/sparse.hpp"

namespace phplate {

/// Raised when a factorization or eigen solve fails; carries a residual
/// when one is available.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Named blocks of a partitioned state vector.
class BlockLayout {
 public:
  BlockLayout() = default;
  BlockLayout(std::vector<std::string> names, std::vector<int> sizes)
      : names_(std::move(names)), sizes_(std::move(sizes)) {
    if (names_.size() != sizes_.size()) throw std::invalid_argument("BlockLayout: size mismatch");
    offsets_.push_back(0);
    for (int s : sizes_) offsets_.push_back(offsets_.back() + s);
  }

  int blocks() const { return static_cast<int>(sizes_.size()); }
  int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int b) const { return sizes_.at(b); }
  int offset(int b) const { return offsets_.at(b); }
  const std::string& name(int b) const { return names_.at(b); }
  int block_of(int dof) const {
    for (int b = 0; b < blocks(); ++b)
      if (dof < offsets_[b + 1]) return b;
    throw std::out_of_range("BlockLayout: dof outside layout");
  }

  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

/// Concatenated tilde coordinates x = (M_1 a_1, ..., M_k a_k).
class PhStateVector {
 public:
  PhStateVector(BlockLayout layout, Eigen::VectorXd values)
      : layout_(std::move(layout)), values_(std::move(values)) {
    if (values_.size() != layout_.total())
      throw std::invalid_argument("PhStateVector: length does not match block layout");
  }
  explicit PhStateVector(BlockLayout layout)
      : PhStateVector(layout, Eigen::VectorXd::Zero(layout.total())) {}

  const BlockLayout& layout() const { return layout_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  auto block(int b) const { return values_.segment(layout_.offset(b), layout_.size(b)); }
  auto block(int b) { return values_.segment(layout_.offset(b), layout_.size(b)); }

 private:
  BlockLayout layout_;
  Eigen::VectorXd values_;
};

/// Finite-dimensional port-Hamiltonian system in tilde coordinates:
///
///   dx/dt = (J - G_R S G_R^T) e + B u,   y = B^T e,
///   e = M^{-1} K M^{-1} x,               H(x) = 1/2 x^T M^{-1} K M^{-1} x.
///
/// M is block diagonal SPD, J exactly skew, K symmetric PSD. The object is
/// immutable; the mass factorization is shared between copies.
class AssembledPhSystem {
 public:
  AssembledPhSystem(BlockLayout layout, SparseMatrix mass, SparseMatrix interconnection,
                    SparseMatrix energy, SparseMatrix input, std::vector<std::string> input_labels)
      : layout_(std::move(layout)),
        mass_(std::move(mass)),
        interconnection_(std::move(interconnection)),
        energy_(std::move(energy)),
        input_(std::move(input)),
        input_labels_(std::move(input_labels)) {
    const int n = layout_.total();
    if (mass_.rows() != n || mass_.cols() != n || interconnection_.rows() != n ||
        interconnection_.cols() != n || energy_.rows() != n || energy_.cols() != n ||
        input_.rows() != n)
      throw std::invalid_argument("AssembledPhSystem: matrix sizes do not match layout");
    if (static_cast<int>(input_labels_.size()) != input_.cols())
      throw std::invalid_argument("AssembledPhSystem: one label per input column required");
    resistive_map_ = SparseMatrix(n, 0);
    resistive_gain_ = SparseMatrix(0, 0);
    factorize();
  }

  const BlockLayout& layout() const { return layout_; }
  int size() const { return layout_.total(); }
  int inputs() const { return static_cast<int>(input_.cols()); }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& interconnection() const { return interconnection_; }
  const SparseMatrix& energy() const { return energy_; }
  const SparseMatrix& input() const { return input_; }
  const std::vector<std::string>& input_labels() const { return input_labels_; }
  const SparseMatrix& resistive_map() const { return resistive_map_; }
  const SparseMatrix& resistive_gain() const { return resistive_gain_; }
  bool has_dissipation() const { return resistive_map_.cols() > 0 && resistive_gain_.nonZeros() > 0; }

  /// R = G_R S G_R^T (zero matrix without a resistive port).
  SparseMatrix dissipation() const {
    if (resistive_map_.cols() == 0) return SparseMatrix(size(), size());
    return SparseMatrix(resistive_map_ * resistive_gain_ * SparseMatrix(resistive_map_.transpose()));
  }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = mass_factor_->solve(rhs);
    if (mass_factor_->info() != Eigen::Success) throw SolverError("mass solve failed");
    return x;
  }
  Eigen::MatrixXd solve_mass(const Eigen::MatrixXd& rhs) const {
    Eigen::MatrixXd x = mass_factor_->solve(rhs);
    if (mass_factor_->info() != Eigen::Success) throw SolverError("mass solve failed");
    return x;
  }

  AssembledPhSystem with_resistive_port(SparseMatrix map, SparseMatrix gain) const {
    if (map.rows() != size() || gain.rows() != map.cols() || gain.cols() != map.cols())
      throw std::invalid_argument("with_resistive_port: inconsistent G_R / S sizes");
    if (symmetry_defect(gain) > 1e-12 * std::max(1.0, max_abs(gain)))
      throw std::invalid_argument("with_resistive_port: S must be symmetric");
    AssembledPhSystem out = *this;
    out.resistive_map_ = std::move(map);
    out.resistive_gain_ = std::move(gain);
    return out;
  }

  AssembledPhSystem with_appended_input(const Eigen::VectorXd& column, std::string label) const {
    if (column.size() != size()) throw std::invalid_argument("with_appended_input: size mismatch");
    Triplets t;
    append_block(t, input_, 0, 0);
    for (int i = 0; i < column.size(); ++i)
      if (column[i] != 0.0) t.emplace_back(i, inputs(), column[i]);
    AssembledPhSystem out = *this;
    out.input_ = from_triplets(size(), inputs() + 1, t);
    out.input_labels_.push_back(std::move(label));
    return out;
  }

  /// Keeps only the listed input columns.
  AssembledPhSystem with_inputs(const std::vector<int>& columns) const {
    AssembledPhSystem out = *this;
    out.input_ = submatrix(input_, iota_range(0, size()), columns);
    out.input_labels_.clear();
    for (int c : columns) out.input_labels_.push_back(input_labels_.at(c));
    return out;
  }

  /// Galerkin restriction: removes the listed dofs from state, test space and
  /// every operator (essential boundary conditions by elimination).
  AssembledPhSystem restricted(std::vector<int> removed) const {
    std::sort(removed.begin(), removed.end());
    removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
    std::vector<int> keep;
    std::vector<int> sizes(layout_.blocks(), 0);
    std::vector<std::string> names;
    for (int b = 0; b < layout_.blocks(); ++b) names.push_back(layout_.name(b));
    for (int i = 0, r = 0; i < size(); ++i) {
      if (r < static_cast<int>(removed.size()) && removed[r] == i) {
        ++r;
        continue;
      }
      keep.push_back(i);
      ++sizes[layout_.block_of(i)];
    }
    const auto all_inputs = iota_range(0, inputs());
    AssembledPhSystem out(BlockLayout(names, sizes), submatrix(mass_, keep, keep),
                          submatrix(interconnection_, keep, keep), submatrix(energy_, keep, keep),
                          submatrix(input_, keep, all_inputs), input_labels_);
    if (resistive_map_.cols() > 0)
      out = out.with_resistive_port(
          submatrix(resistive_map_, keep, iota_range(0, static_cast<int>(resistive_map_.cols()))),
          resistive_gain_);
    return out;
  }

 private:
  void factorize() {
    auto f = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
    f->compute(mass_);
    if (f->info() != Eigen::Success)
      throw SolverError("mass matrix is not SPD (assembly defect)");
    mass_factor_ = std::move(f);
  }

  BlockLayout layout_;
  SparseMatrix mass_;
  SparseMatrix interconnection_;
  SparseMatrix energy_;
  SparseMatrix input_;
  std::vector<std::string> input_labels_;
  SparseMatrix resistive_map_;
  SparseMatrix resistive_gain_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> mass_factor_;
};

/// A system with essential conditions eliminated, remembering which dofs and
/// input columns of the unconstrained system survive.
struct ConstrainedSystem {
  AssembledPhSystem system;
  std::vector<int> kept_dofs;
  std::vector<int> kept_inputs;
  int full_size = 0;
  int full_inputs = 0;

  /// Zero-filled unconstrained vector (coefficients or efforts).
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const {
    if (reduced.size() != static_cast<int>(kept_dofs.size()))
      throw std::invalid_argument("ConstrainedSystem::expand: size mismatch");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(full_size);
    for (std::size_t i = 0; i < kept_dofs.size(); ++i) full[kept_dofs[i]] = reduced[i];
    return full;
  }
  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const {
    if (full.size() != full_size) throw std::invalid_argument("ConstrainedSystem::reduce: size mismatch");
    Eigen::VectorXd r(kept_dofs.size());
    for (std::size_t i = 0; i < kept_dofs.size(); ++i) r[i] = full[kept_dofs[i]];
    return r;
  }
  Eigen::VectorXd reduce_input(const Eigen::VectorXd& full) const {
    if (full.size() != full_inputs)
      throw std::invalid_argument("ConstrainedSystem::reduce_input: size mismatch");
    Eigen::VectorXd r(kept_inputs.size());
    for (std::size_t i = 0; i < kept_inputs.size(); ++i) r[i] = full[kept_inputs[i]];
    return r;
  }
};

/// Eliminates `removed` dofs, then keeps the input columns accepted by
/// `keep_input` that are not identically zero after elimination.
template <class Pred>
ConstrainedSystem constrain(const AssembledPhSystem& sys, std::vector<int> removed, Pred keep_input) {
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  ConstrainedSystem out{sys.restricted(removed), {}, {}, sys.size(), sys.inputs()};
  for (int i = 0, r = 0; i < sys.size(); ++i) {
    if (r < static_cast<int>(removed.size()) && removed[r] == i) {
      ++r;
      continue;
    }
    out.kept_dofs.push_back(i);
  }
  for (int c = 0; c < out.system.inputs(); ++c)
    if (keep_input(c) && max_abs(SparseMatrix(out.system.input().col(c))) != 0.0)
      out.kept_inputs.push_back(c);
  out.system = out.system.with_inputs(out.kept_inputs);
  return out;
}

inline void check_size(const AssembledPhSystem& sys, const Eigen::VectorXd& x, const char* what) {
  if (x.size() != sys.size())
    throw std::invalid_argument(std::string(what) + ": state length " + std::to_string(x.size()) +
                                " does not match system size " + std::to_string(sys.size()));
}

/// Energy coordinates a = M^{-1} x.
inline Eigen::VectorXd energy_coordinates(const AssembledPhSystem& sys, const Eigen::VectorXd& x) {
  check_size(sys, x, "energy_coordinates");
  return sys.solve_mass(x);
}

/// Effort coefficients e = dH/dx = M^{-1} K M^{-1} x (two SPD solves).
inline Eigen::VectorXd coenergy(const AssembledPhSystem& sys, const Eigen::VectorXd& x) {
  const Eigen::VectorXd a = energy_coordinates(sys, x);
  return sys.solve_mass(Eigen::VectorXd(sys.energy() * a));
}

inline Eigen::VectorXd coenergy(const AssembledPhSystem& sys, const PhStateVector& x) {
  return coenergy(sys, x.values());
}

/// H = 1/2 a^T K a with a = M^{-1} x.
inline double hamiltonian(const AssembledPhSystem& sys, const Eigen::VectorXd& x) {
  const Eigen::VectorXd a = energy_coordinates(sys, x);
  return 0.5 * a.dot(sys.energy() * a);
}

inline double hamiltonian(const AssembledPhSystem& sys, const PhStateVector& x) {
  return hamiltonian(sys, x.values());
}

struct DynamicsResult {
  Eigen::VectorXd rate;    // dx/dt
  Eigen::VectorXd output;  // y = B^T e
  Eigen::VectorXd effort;  // e
  double dissipation = 0.0;  // e^T R e >= 0
};

inline DynamicsResult dynamics(const AssembledPhSystem& sys, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
  check_size(sys, x, "dynamics");
  if (u.size() != sys.inputs())
    throw std::invalid_argument("dynamics: input length " + std::to_string(u.size()) +
                                " does not match " + std::to_string(sys.inputs()) + " input columns");
  DynamicsResult r;
  r.effort = coenergy(sys, x);
  r.rate = sys.interconnection() * r.effort + sys.input() * u;
  if (sys.resistive_map().cols() > 0) {
    const Eigen::VectorXd f = sys.resistive_map().transpose() * r.effort;
    const Eigen::VectorXd s = sys.resistive_gain() * f;
    r.rate -= sys.resistive_map() * s;
    r.dissipation = f.dot(s);
  }
  r.output = sys.input().transpose() * r.effort;
  return r;
}

/// Adds a resistive port on one block: G_R selects the block, S is given.
inline AssembledPhSystem attach_block_damping(const AssembledPhSystem& sys, int block,
                                              SparseMatrix gain) {
  const int n = sys.layout().size(block), off = sys.layout().offset(block);
  if (gain.rows() != n || gain.cols() != n)
    throw std::invalid_argument("attach_block_damping: S must match the block size");
  Triplets t;
  for (int i = 0; i < n; ++i) t.emplace_back(off + i, i, 1.0);
  return sys.with_resistive_port(from_triplets(sys.size(), n, t), std::move(gain));
}

// ---------------------------------------------------------------------------
// Reduced second-order form and eigenanalysis
// ---------------------------------------------------------------------------

/// Symmetric pencil (K_r, M_r) of the undamped dynamics with block 0 as the
/// "velocity" partition p and the remaining blocks as q:
///
///   K_r = G^T Q_q G,  M_r = Q_p^{-1} = M_p K_p^{-1} M_p,
///
/// where G = J_qp and Q = M^{-1} K M^{-1}. Eigenvectors are velocity efforts.
struct ReducedPencil {
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
  SparseMatrix coupling;  // G = J_qp
};

inline ReducedPencil reduced_pencil(const AssembledPhSystem& sys) {
  const auto& layout = sys.layout();
  if (layout.blocks() < 2) throw std::invalid_argument("reduced_pencil: need at least two blocks");
  const int np = layout.size(0), n = sys.size();
  const auto p = iota_range(0, np), q = iota_range(np, n);
  const SparseMatrix& j = sys.interconnection();
  if (max_abs(submatrix(j, p, p)) != 0.0 || max_abs(submatrix(j, q, q)) != 0.0)
    throw std::invalid_argument("reduced_pencil: interconnection is not velocity/strain separable");
  if (max_abs(submatrix(sys.mass(), p, q)) != 0.0 || max_abs(submatrix(sys.energy(), p, q)) != 0.0)
    throw std::invalid_argument("reduced_pencil: mass/energy couple the partitions");

  ReducedPencil out;
  out.coupling = submatrix(j, q, p);
  out.stiffness.resize(np, np);
  const int chunk = 64;
  for (int c0 = 0; c0 < np; c0 += chunk) {
    const int c1 = std::min(np, c0 + chunk);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, c1 - c0);
    const SparseMatrix gcols = out.coupling.middleCols(c0, c1 - c0);
    z.bottomRows(n - np) = Eigen::MatrixXd(gcols);
    const Eigen::MatrixXd w = sys.solve_mass(Eigen::MatrixXd(sys.energy() * sys.solve_mass(z)));
    out.stiffness.middleCols(c0, c1 - c0) = out.coupling.transpose() * w.bottomRows(n - np);
  }
  out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();

  const SparseMatrix mp = submatrix(sys.mass(), p, p);
  const SparseMatrix kp = submatrix(sys.energy(), p, p);
  Eigen::SimplicialLDLT<SparseMatrix> kf(kp);
  if (kf.info() != Eigen::Success) throw SolverError("reduced_pencil: velocity energy block singular");
  const Eigen::MatrixXd x = kf.solve(Eigen::MatrixXd(mp));
  out.mass = mp * x;
  out.mass = 0.5 * (out.mass + out.mass.transpose()).eval();
  return out;
}

struct EigenModes {
  Eigen::VectorXd omega;   // rad / time, ascending
  Eigen::VectorXd hertz;   // omega / 2 pi
  Eigen::MatrixXd shapes;  // velocity-effort coefficients, one column per mode
  double min_eigenvalue = 0.0;  // smallest omega^2 before clipping
  double max_eigenvalue = 0.0;
  int zero_modes = 0;            // omega^2 <= 1e-10 max omega^2 (rigid or unseen by stiffness)
  double residual = 0.0;        // max relative residual |K v - w^2 M v| / |K v|
};

/// Undamped modal analysis through the reduced symmetric pencil. Requires
/// homogeneous boundary conditions already applied (elimination or zero
/// inputs) and no resistive port.
/// With skip_zero the zero-frequency modes are counted but not returned.
inline EigenModes eigenmodes(const AssembledPhSystem& sys, int count = -1, bool skip_zero = false) {
  if (sys.has_dissipation())
    throw std::invalid_argument("eigenmodes: system has a resistive port; use first_order_spectrum");
  const ReducedPencil pencil = reduced_pencil(sys);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(pencil.stiffness, pencil.mass);
  if (es.info() != Eigen::Success) throw SolverError("eigenmodes: generalized eigensolver failed");
  const Eigen::VectorXd lambda = es.eigenvalues();
  const int n = static_cast<int>(lambda.size());
  EigenModes out;
  out.min_eigenvalue = lambda.minCoeff();
  out.max_eigenvalue = lambda.maxCoeff();
  while (out.zero_modes < n && lambda[out.zero_modes] <= 1e-10 * out.max_eigenvalue) ++out.zero_modes;
  const int first = skip_zero ? out.zero_modes : 0;
  const int m = count < 0 ? n - first : std::min(count, n - first);
  out.omega.resize(m);
  out.shapes = es.eigenvectors().middleCols(first, m);
  for (int i = 0; i < m; ++i) {
    const double l = lambda[first + i];
    out.omega[i] = std::sqrt(std::max(l, 0.0));
    const Eigen::VectorXd v = out.shapes.col(i);
    const Eigen::VectorXd kv = pencil.stiffness * v;
    const double res = (kv - l * (pencil.mass * v)).norm() / std::max(kv.norm(), 1e-300);
    out.residual = std::max(out.residual, l > 1e-12 * out.max_eigenvalue ? res : 0.0);
  }
  out.hertz = out.omega / (2.0 * std::numbers::pi);
  return out;
}

/// Full spectrum of the first-order operator (J - R) M^{-1} K M^{-1}
/// (dense; intended for small systems).
inline Eigen::VectorXcd first_order_spectrum(const AssembledPhSystem& sys) {
  const int n = sys.size();
  if (n > 4000) throw std::invalid_argument("first_order_spectrum: system too large for dense analysis");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd q = sys.solve_mass(Eigen::MatrixXd(sys.energy() * sys.solve_mass(id)));
  const Eigen::MatrixXd a =
      Eigen::MatrixXd(sys.interconnection()) * q - Eigen::MatrixXd(sys.dissipation()) * q;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw SolverError("first_order_spectrum: eigensolver failed");
  return es.eigenvalues();
}

/// Static response to constant inputs u: the velocity-partition coefficient
/// vector d with K_r d = (B u)_p, i.e. the time integral of the velocity
/// effort at equilibrium (the displacement in mechanical models).
inline Eigen::VectorXd static_response(const AssembledPhSystem& sys, const Eigen::VectorXd& u) {
  if (u.size() != sys.inputs()) throw std::invalid_argument("static_response: input size mismatch");
  const int np = sys.layout().size(0);
  const Eigen::VectorXd bu = sys.input() * u;
  if (bu.tail(sys.size() - np).lpNorm<Eigen::Infinity>() != 0.0)
    throw std::invalid_argument("static_response: inputs must act on the velocity partition only");
  const ReducedPencil pencil = reduced_pencil(sys);
  Eigen::LDLT<Eigen::MatrixXd> f(pencil.stiffness);
  const Eigen::VectorXd d = f.solve(bu.head(np));
  const double res = (pencil.stiffness * d - bu.head(np)).norm() / std::max(bu.head(np).norm(), 1e-300);
  if (f.info() != Eigen::Success || !(res < 1e-8))
    throw SolverError("static_response: reduced stiffness is singular (missing essential BCs?)", res);
  return d;
}

}  // namespace phplate
