// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phplate/beam.hpp"
#include "phplate/integrate.hpp"
#include "phplate/plate.hpp"
#include "phplate/verify.hpp"

using namespace phplate;
using BC = BoundaryCondition;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::VectorXd gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

const MaterialParams unit_plate = MaterialParams::plate_with_rigidity(1.0, 1.0, 0.3);
constexpr std::array<BC, 4> ss{BC::simply_supported, BC::simply_supported, BC::simply_supported, BC::simply_supported};
constexpr std::array<BC, 4> clamped{BC::clamped, BC::clamped, BC::clamped, BC::clamped};

// 1 ---------------------------------------------------------------------------
Outcome skew_symmetry() {
  double worst = 0.0;
  int systems = 0;
  auto record = [&](const AssembledPhSystem& s) {
    worst = std::max(worst, skew_defect(s.interconnection()));
    ++systems;
  };
  const std::array<BC, 4> bcs{BC::clamped, BC::simply_supported, BC::free, BC::input};
  const Mesh2D mesh(1.2, 0.8, 4, 3);
  for (auto c : {CurvatureSpace::dq3, CurvatureSpace::q2, CurvatureSpace::bfs}) {
    const PlatePhSystem plate = attach_damping(assemble_plate_force_control(mesh, unit_plate, c), 0.3);
    record(plate.system);
    for (BC a : bcs)
      for (BC b : bcs) {
        record(apply_plate_conditions(plate, {a, b, a, b}).system);
        record(apply_plate_conditions(plate, {a, a, b, b}).system);
      }
  }
  const PlatePhSystem k = assemble_plate_kinematic_control(mesh, unit_plate);
  record(k.system);
  for (BC a : {BC::clamped, BC::input})
    for (BC b : {BC::clamped, BC::input}) record(apply_plate_conditions(k, {a, b, b, a}).system);
  for (auto v : {ControlVariant::force, ControlVariant::kinematic}) {
    const BeamPhSystem beam = assemble_beam(Mesh1D(1.5, 9), MaterialParams{}, v);
    record(beam.system);
    for (BC a : bcs)
      for (BC b : bcs) record(apply_beam_conditions(beam, a, b).system);
  }
  return {worst == 0.0, fmt("%d systems, max |J + J^T| = %.3g (required: 0)", systems, worst)};
}

// 2 ---------------------------------------------------------------------------
Outcome power_balance() {
  const Mesh2D mesh(1.0, 1.0, 8, 8);
  std::vector<AssembledPhSystem> systems{
      assemble_plate_force_control(mesh, unit_plate).system,
      attach_damping(assemble_plate_force_control(mesh, unit_plate), 0.7).system,
      attach_damping(assemble_plate_kinematic_control(mesh, unit_plate), 0.7).system};
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  int samples = 0;
  for (const auto& s : systems)
    for (int k = 0; k < 100; ++k, ++samples) {
      const Eigen::VectorXd x = gaussian(rng, s.size()), u = gaussian(rng, s.inputs());
      const DynamicsResult d = dynamics(s, x, u);
      const double a = d.rate.dot(d.effort), b = d.output.dot(u);
      // size of the summands entering the two inner products
      const double scale = d.rate.cwiseProduct(d.effort).cwiseAbs().sum() + d.output.cwiseProduct(u).cwiseAbs().sum() +
                           d.dissipation;
      worst = std::max(worst, std::abs(a - b + d.dissipation) / scale);
    }
  return {worst <= 1e-10, fmt("%d samples on 8x8 plates, max residual / scale = %.3g (<= 1e-10)", samples, worst)};
}

// 3 ---------------------------------------------------------------------------
Outcome conservation() {
  const Mesh2D mesh(1.0, 1.0, 8, 8);
  const PlatePhSystem plate = assemble_plate_force_control(mesh, unit_plate);
  const ConstrainedSystem c = apply_plate_conditions(plate, ss);
  std::mt19937_64 rng(7);
  const Eigen::VectorXd x0 = c.system.mass() * gaussian(rng, c.system.size());
  const SimulationTrace t = implicit_midpoint(c.system, x0, zero_input(c.system.inputs()), 1e-3, 1000);
  const double drift = t.max_relative_drift();

  const ConstrainedSystem d = apply_plate_conditions(attach_damping(plate, 0.5), ss);
  const SimulationTrace td = implicit_midpoint(d.system, x0, zero_input(d.system.inputs()), 1e-3, 1000);
  int increases = 0;
  for (std::size_t k = 1; k < td.hamiltonian.size(); ++k)
    if (td.hamiltonian[k] > td.hamiltonian[k - 1]) ++increases;
  return {drift <= 1e-12 && increases == 0 && t.steps() == 1000 && td.steps() == 1000,
          fmt("undamped drift = %.3g (<= 1e-12); damped: %d increasing steps of 1000, H %.6g -> %.6g", drift,
              increases, td.hamiltonian.front(), td.hamiltonian.back())};
}

// 4 ---------------------------------------------------------------------------
Outcome step_balance() {
  const Mesh2D mesh(1.0, 1.0, 8, 8);
  const PlatePhSystem plate = assemble_plate_force_control(mesh, unit_plate);
  const ConstrainedSystem c =
      apply_plate_conditions(plate, {BC::simply_supported, BC::input, BC::simply_supported, BC::simply_supported});
  Eigen::VectorXd pattern = Eigen::VectorXd::Zero(c.system.inputs());
  int active = 0;
  for (int i = 0; i < pattern.size(); ++i) {
    const std::string& l = c.system.input_labels()[i];
    if (l.starts_with("moment:right:") && l.ends_with(":value")) {
      pattern[i] = 1.0;
      ++active;
    }
  }
  const InputSignal u = [&](double t) { return Eigen::VectorXd(std::sin(2 * std::numbers::pi * 5 * t) * pattern); };
  const SimulationTrace t = implicit_midpoint(c.system, Eigen::VectorXd::Zero(c.system.size()), u, 1e-3, 500);
  double worst = 0.0;
  for (std::size_t k = 1; k < t.hamiltonian.size(); ++k) {
    const double dh = t.hamiltonian[k] - t.hamiltonian[k - 1], supplied = 1e-3 * t.supplied[k];
    const double scale = std::max({std::abs(t.hamiltonian[k]), std::abs(t.hamiltonian[k - 1]), std::abs(supplied)});
    worst = std::max(worst, std::abs(dh - supplied) / scale);
  }
  return {active > 0 && worst <= 1e-10 && t.hamiltonian.back() > 0.0,
          fmt("M_nn input on %d right-edge coefficients, 500 steps, max |dH - dt y.u| / scale = %.3g (<= 1e-10)",
              active, worst)};
}

// 5 ---------------------------------------------------------------------------
Outcome plate_frequency() {
  const double ref = 2.0 * oracle::pi * oracle::pi;
  std::vector<double> err;
  for (int n : {4, 8, 16}) {
    const PlatePhSystem plate = assemble_plate_force_control(Mesh2D(1, 1, n, n), MaterialParams::plate_with_rigidity(1, 1, 0.3));
    err.push_back(std::abs(eigenmodes(apply_plate_conditions(plate, ss).system, 1).omega[0] - ref) / ref);
  }
  const double order = std::log2(err[1] / err[2]);
  return {err[1] <= 1e-2 && err[2] <= 1e-3 && order >= 3.0,
          fmt("rel. error 4x4 %.3g, 8x8 %.3g (<= 1e-2), 16x16 %.3g (<= 1e-3), order %.2f (>= 3)", err[0], err[1],
              err[2], order)};
}

// 6 ---------------------------------------------------------------------------
Outcome beam_frequency() {
  const double len = 2.0, ei = 5.0, rho = 0.8;
  MaterialParams p;
  p.young_modulus = ei;
  p.line_density = rho;
  const double beta_l = oracle::cantilever_beta(1);
  const double ref = beta_l * beta_l * std::sqrt(p.flexural_rigidity() / rho) / (len * len);
  const BeamPhSystem beam = assemble_beam(Mesh1D(len, 16), p, ControlVariant::force);
  const double w = eigenmodes(apply_beam_conditions(beam, BC::clamped, BC::free).system, 1).omega[0];
  const double err = std::abs(w - ref) / ref;
  return {err <= 1e-3, fmt("omega_1 = %.12g, oracle %.12g, rel. error %.3g (<= 1e-3)", w, ref, err)};
}

// 7 ---------------------------------------------------------------------------
Outcome adjointness() {
  std::mt19937_64 rng(314159);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    worst = std::max(worst, check_adjointness(random_test_fields(rng, BumpKind::polynomial, 3, 1.0, 1.5)).residual);
  TestFieldSpec c = random_test_fields(rng, BumpKind::polynomial, 3, 1.0, 1.5);
  c.tensor = {constant_field(1.1), constant_field(-0.6), constant_field(0.4)};
  const AdjointnessResult r = check_adjointness(c);
  const double hess = std::abs(r.hessian_side) / r.scale;
  return {worst < 1e-8 && r.div_div_side == 0.0 && hess <= 1e-12,
          fmt("20 pairs max residual %.3g (< 1e-8); constant tensor: div-div side %.3g (= 0), Hessian side %.3g "
              "relative (<= 1e-12)",
              worst, r.div_div_side, hess)};
}

// 8 ---------------------------------------------------------------------------
/// Nonincreasing until the round-off floor, and at the floor at the end.
bool decreases_to_plateau(const std::vector<double>& r, double floor) {
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i - 1] > floor && r[i] > r[i - 1]) return false;
  return r.front() > 1e3 * floor && r.back() <= floor;
}

Outcome pairing() {
  std::mt19937_64 rng(2718);
  double plate_worst = 0.0, beam_worst = 0.0;
  bool plateau = true;
  const std::vector<int> points{1, 2, 3, 4, 6, 8, 10, 12};
  for (int k = 0; k < 10; ++k) {
    const PlateEffortField a{random_smooth_field(rng), random_smooth_field(rng), random_smooth_field(rng),
                             random_smooth_field(rng)};
    const PlateEffortField b{random_smooth_field(rng), random_smooth_field(rng), random_smooth_field(rng),
                             random_smooth_field(rng)};
    const auto ba = beam_structure_element(random_smooth_field_1d(rng), random_smooth_field_1d(rng), 1.4);
    const auto bb = beam_structure_element(random_smooth_field_1d(rng), random_smooth_field_1d(rng), 1.4);
    std::vector<double> rp, rb;
    for (int q : points) {
      rp.push_back(check_plate_pairing(a, b, 1.0, 1.3, q, 2).relative());
      rb.push_back(beam_pairing(ba, bb, 1.4, q, 2).relative());
    }
    plate_worst = std::max(plate_worst, rp.back());
    beam_worst = std::max(beam_worst, rb.back());
    plateau = plateau && decreases_to_plateau(rp, 1e-12) && decreases_to_plateau(rb, 1e-12);
  }
  return {plate_worst < 1e-6 && beam_worst < 1e-6 && plateau,
          fmt("10 field pairs each: plate %.3g, beam %.3g (< 1e-6); monotone to round-off plateau: %s", plate_worst,
              beam_worst, plateau ? "yes" : "no")};
}

// 9 ---------------------------------------------------------------------------
Outcome gradient() {
  const PlatePhSystem plate = assemble_plate_force_control(Mesh2D(1.0, 1.0, 4, 4), unit_plate);
  const BeamPhSystem beam = assemble_beam(Mesh1D(1.0, 8), MaterialParams{}, ControlVariant::kinematic);
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const AssembledPhSystem& s = k % 2 ? beam.system : plate.system;
    const Eigen::VectorXd x = gaussian(rng, s.size()), dir = gaussian(rng, s.size());
    const double h = 1e-5 * x.norm() / dir.norm();
    const double fd = (hamiltonian(s, x + h * dir) - hamiltonian(s, x - h * dir)) / (2 * h);
    const double an = coenergy(s, x).dot(dir);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  return {worst <= 1e-6, fmt("50 states/directions, max relative mismatch %.3g (<= 1e-6)", worst)};
}

// 10 --------------------------------------------------------------------------
Outcome static_gravity() {
  const int n = 8;
  const double d = 1.7, nu = 0.3, mu = 2.4, g = 9.81;
  PlatePhSystem plate = assemble_plate_force_control(Mesh2D(1.0, 1.0, n, n), MaterialParams::plate_with_rigidity(d, mu, nu));
  plate = attach_distributed_load(plate, [&](Point2) { return -mu * g; });
  const ConstrainedSystem c = apply_plate_conditions(plate, clamped);
  const Eigen::VectorXd w = static_response(c.system, Eigen::VectorXd::Ones(1));

  const Eigen::SparseMatrix<double> k = oracle::bfs_bending_stiffness(1.0, 1.0, n, n, d, nu);
  const Eigen::VectorXd f = oracle::bfs_constant_load(1.0, 1.0, n, n, -mu * g);
  std::vector<int> free;
  for (int i : c.kept_dofs)
    if (i < plate.n1()) free.push_back(i);
  std::vector<Eigen::Triplet<double>> t;
  std::vector<int> pos(k.rows(), -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  for (int col = 0; col < k.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
  Eigen::SparseMatrix<double> kr(free.size(), free.size());
  kr.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd fr(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) fr[i] = f[free[i]];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(kr);
  const Eigen::VectorXd ref = solver.solve(fr);
  const double err = (w - ref).lpNorm<Eigen::Infinity>() / ref.lpNorm<Eigen::Infinity>();
  int centre = -1;
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i] == 4 * (n / 2 * (n + 1) + n / 2)) centre = static_cast<int>(i);
  return {w.size() == ref.size() && err <= 1e-8,
          fmt("clamped 8x8 plate, centre deflection %.10g m, max rel. difference %.3g (<= 1e-8)",
              centre >= 0 ? w[centre] : 0.0, err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"skew-symmetric interconnection", skew_symmetry},
      {"algebraic power balance", power_balance},
      {"energy conservation in time", conservation},
      {"per-step power balance under boundary input", step_balance},
      {"plate eigenfrequency convergence", plate_frequency},
      {"beam eigenfrequency", beam_frequency},
      {"Hessian / double-divergence adjointness", adjointness},
      {"Stokes-Dirac pairing residuals", pairing},
      {"Hamiltonian gradient", gradient},
      {"static gravity deflection", static_gravity},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
