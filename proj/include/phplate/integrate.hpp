#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "phplate/phsys.hpp"

namespace phplate {

using InputSignal = std::function<Eigen::VectorXd(double)>;

inline InputSignal zero_input(int inputs) {
  return [inputs](double) { return Eigen::VectorXd::Zero(inputs); };
}

struct SimulationOptions {
  int snapshot_every = 0;  // 0: initial and final state only
  std::vector<std::string> probe_labels;
  std::function<std::vector<double>(const Eigen::VectorXd& state, const Eigen::VectorXd& effort)> probe;
};

/// Time series of one run. Entry k refers to time[k]; the port and residual
/// columns at k > 0 belong to the step (t[k-1], t[k]) and are sampled at its
/// midpoint. Entry 0 of those columns is zero.
struct SimulationTrace {
  std::vector<double> time;
  std::vector<double> hamiltonian;
  std::vector<double> residual;      // relative per-step power-balance defect
  std::vector<double> supplied;      // y^T u
  std::vector<double> dissipated;    // e^T R e
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> outputs;
  std::vector<std::vector<double>> probes;
  std::vector<std::string> probe_labels;
  std::vector<std::pair<int, Eigen::VectorXd>> snapshots;  // (step, tilde state)
  bool diverged = false;

  std::size_t steps() const { return time.empty() ? 0 : time.size() - 1; }
  double max_relative_drift() const {
    double h0 = hamiltonian.front(), m = 0.0;
    for (double h : hamiltonian) m = std::max(m, std::abs(h - h0));
    return h0 != 0.0 ? m / std::abs(h0) : m;
  }
  double max_residual() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, r);
    return m;
  }
};

/// Implicit midpoint rule in energy coordinates a = M^{-1} x:
///
///   [ M        -dt (J - R) ] [a_{n+1}]   [M a_n + dt B u_{n+1/2}]
///   [ -K/2      M          ] [ e     ] = [K a_n / 2             ]
///
/// e is the midpoint effort, so H_{n+1} - H_n = dt (y^T u - e^T R e)
/// exactly up to the linear solve. The matrix is factorized once.
class MidpointStepper {
 public:
  MidpointStepper(const AssembledPhSystem& sys, double dt) : sys_(sys), dt_(dt), r_(sys.dissipation()) {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw std::invalid_argument("MidpointStepper: dt must be finite and nonzero");
    const int n = sys.size();
    const SparseMatrix jr = sys.interconnection() - r_;
    Triplets t;
    append_block(t, sys.mass(), 0, 0);
    append_block(t, jr, 0, n, -dt);
    append_block(t, sys.energy(), n, 0, -0.5);
    append_block(t, sys.mass(), n, n);
    a_ = from_triplets(2 * n, 2 * n, t);
    lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
    lu_->analyzePattern(a_);
    lu_->factorize(a_);
    if (lu_->info() != Eigen::Success) throw SolverError("MidpointStepper: factorization failed");
  }

  double dt() const { return dt_; }
  const AssembledPhSystem& system() const { return sys_; }

  struct Step {
    Eigen::VectorXd alpha;   // new energy coordinates
    Eigen::VectorXd effort;  // midpoint effort
    Eigen::VectorXd output;  // y at the midpoint
    double supplied = 0.0;
    double dissipated = 0.0;
  };

  /// One step from energy coordinates `alpha` with midpoint input u.
  Step step(const Eigen::VectorXd& alpha, const Eigen::VectorXd& u) const {
    const int n = sys_.size();
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = sys_.mass() * alpha + dt_ * (sys_.input() * u);
    rhs.tail(n) = 0.5 * (sys_.energy() * alpha);
    Eigen::VectorXd z = lu_->solve(rhs);
    if (lu_->info() != Eigen::Success) throw SolverError("MidpointStepper: solve failed");
    const Eigen::VectorXd defect = rhs - a_ * z;
    z += lu_->solve(defect);
    Step s;
    s.alpha = z.head(n);
    s.effort = z.tail(n);
    s.output = sys_.input().transpose() * s.effort;
    s.supplied = s.output.dot(u);
    s.dissipated = s.effort.dot(r_ * s.effort);
    return s;
  }

 private:
  AssembledPhSystem sys_;
  double dt_;
  SparseMatrix r_;
  SparseMatrix a_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

namespace detail {

inline void record_probe(SimulationTrace& trace, const SimulationOptions& opt, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& e) {
  if (opt.probe) trace.probes.push_back(opt.probe(x, e));
}

inline bool snapshot_due(const SimulationOptions& opt, int step, int steps) {
  return step == 0 || step == steps || (opt.snapshot_every > 0 && step % opt.snapshot_every == 0);
}

}  // namespace detail

inline SimulationTrace implicit_midpoint(const AssembledPhSystem& sys, const Eigen::VectorXd& x0,
                                         const InputSignal& u, double dt, int steps,
                                         const SimulationOptions& opt = {}) {
  check_size(sys, x0, "implicit_midpoint");
  if (!(dt > 0.0)) throw std::invalid_argument("implicit_midpoint: dt must be > 0");
  if (steps < 0) throw std::invalid_argument("implicit_midpoint: negative step count");
  const MidpointStepper stepper(sys, dt);
  SimulationTrace trace;
  trace.probe_labels = opt.probe_labels;
  Eigen::VectorXd alpha = energy_coordinates(sys, x0);
  double h = 0.5 * alpha.dot(sys.energy() * alpha);
  trace.time.push_back(0.0);
  trace.hamiltonian.push_back(h);
  trace.residual.push_back(0.0);
  trace.supplied.push_back(0.0);
  trace.dissipated.push_back(0.0);
  trace.inputs.push_back(Eigen::VectorXd::Zero(sys.inputs()));
  trace.outputs.push_back(Eigen::VectorXd::Zero(sys.inputs()));
  detail::record_probe(trace, opt, x0, coenergy(sys, x0));
  trace.snapshots.emplace_back(0, x0);

  for (int k = 1; k <= steps; ++k) {
    const double t_mid = (k - 0.5) * dt;
    const Eigen::VectorXd uk = u(t_mid);
    if (uk.size() != sys.inputs()) throw std::invalid_argument("implicit_midpoint: input size mismatch");
    const auto s = stepper.step(alpha, uk);
    const double h_new = 0.5 * s.alpha.dot(sys.energy() * s.alpha);
    const double expected = dt * (s.supplied - s.dissipated);
    const double scale = std::max({std::abs(h), std::abs(h_new), std::abs(dt * s.supplied),
                                   std::numeric_limits<double>::min()});
    alpha = s.alpha;
    trace.time.push_back(k * dt);
    trace.hamiltonian.push_back(h_new);
    trace.residual.push_back(std::abs(h_new - h - expected) / scale);
    trace.supplied.push_back(s.supplied);
    trace.dissipated.push_back(s.dissipated);
    trace.inputs.push_back(uk);
    trace.outputs.push_back(s.output);
    h = h_new;
    const bool snap = detail::snapshot_due(opt, k, steps);
    if (opt.probe || snap) {
      const Eigen::VectorXd x = sys.mass() * alpha;
      if (opt.probe) detail::record_probe(trace, opt, x, sys.solve_mass(Eigen::VectorXd(sys.energy() * alpha)));
      if (snap) trace.snapshots.emplace_back(k, x);
    }
    if (!std::isfinite(h)) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

/// Stormer-Verlet on the (velocity, strain) partition of an undamped,
/// unforced, separable system. Divergence (H above 1e8 H_0 or non-finite)
/// stops the run and sets `diverged`.
inline SimulationTrace leapfrog(const AssembledPhSystem& sys, const Eigen::VectorXd& x0, double dt, int steps,
                                const SimulationOptions& opt = {}) {
  check_size(sys, x0, "leapfrog");
  if (sys.has_dissipation()) throw std::invalid_argument("leapfrog: damped systems are not supported");
  if (!(dt > 0.0)) throw std::invalid_argument("leapfrog: dt must be > 0");
  const int np = sys.layout().size(0), n = sys.size();
  const auto p = iota_range(0, np), q = iota_range(np, n);
  if (max_abs(submatrix(sys.interconnection(), p, p)) != 0.0 ||
      max_abs(submatrix(sys.interconnection(), q, q)) != 0.0 ||
      max_abs(submatrix(sys.mass(), p, q)) != 0.0 || max_abs(submatrix(sys.energy(), p, q)) != 0.0)
    throw std::invalid_argument("leapfrog: system is not velocity/strain separable");
  const SparseMatrix& j = sys.interconnection();

  SimulationTrace trace;
  trace.probe_labels = opt.probe_labels;
  Eigen::VectorXd x = x0;
  const double h0 = hamiltonian(sys, x);
  auto push = [&](int k, double h) {
    trace.time.push_back(k * dt);
    trace.hamiltonian.push_back(h);
    trace.residual.push_back(0.0);
    trace.supplied.push_back(0.0);
    trace.dissipated.push_back(0.0);
    trace.inputs.push_back(Eigen::VectorXd::Zero(sys.inputs()));
    trace.outputs.push_back(Eigen::VectorXd::Zero(sys.inputs()));
  };
  push(0, h0);
  detail::record_probe(trace, opt, x, coenergy(sys, x));
  trace.snapshots.emplace_back(0, x);

  auto strain_effort = [&](const Eigen::VectorXd& state) {
    Eigen::VectorXd part = state;
    part.head(np).setZero();
    return coenergy(sys, part);
  };
  auto velocity_effort = [&](const Eigen::VectorXd& state) {
    Eigen::VectorXd part = state;
    part.tail(n - np).setZero();
    return coenergy(sys, part);
  };
  Eigen::VectorXd eq = strain_effort(x);
  for (int k = 1; k <= steps; ++k) {
    x.head(np) += 0.5 * dt * (j * eq).head(np);
    x.tail(n - np) += dt * (j * velocity_effort(x)).tail(n - np);
    eq = strain_effort(x);
    x.head(np) += 0.5 * dt * (j * eq).head(np);
    const double h = hamiltonian(sys, x);
    push(k, h);
    const bool snap = detail::snapshot_due(opt, k, steps);
    if (opt.probe) detail::record_probe(trace, opt, x, coenergy(sys, x));
    if (snap) trace.snapshots.emplace_back(k, x);
    if (!std::isfinite(h) || h > 1e8 * std::max(h0, std::numeric_limits<double>::min())) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

/// CSV: t, H_d, residual, supplied and dissipated power, inputs, outputs,
/// probes. Full round-trip precision.
inline void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                            const std::vector<std::string>& input_labels) {
  os << "t[s],H_d[J],residual,supplied_power[W],dissipated_power[W]";
  for (const auto& l : input_labels) os << ",u:" << l;
  for (const auto& l : input_labels) os << ",y:" << l;
  for (const auto& l : trace.probe_labels) os << "," << l;
  os << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.time.size(); ++k) {
    os << trace.time[k] << "," << trace.hamiltonian[k] << "," << trace.residual[k] << ","
       << trace.supplied[k] << "," << trace.dissipated[k];
    for (int i = 0; i < trace.inputs[k].size(); ++i) os << "," << trace.inputs[k][i];
    for (int i = 0; i < trace.outputs[k].size(); ++i) os << "," << trace.outputs[k][i];
    if (k < trace.probes.size())
      for (double v : trace.probes[k]) os << "," << v;
    os << "\n";
  }
}

}  // namespace phplate
