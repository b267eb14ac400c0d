#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phplate/beam.hpp"
#include "phplate/config.hpp"
#include "phplate/integrate.hpp"
#include "phplate/phsys.hpp"
#include "phplate/plate.hpp"
#include "phplate/verify.hpp"

namespace phplate {

using Report = nlohmann::ordered_json;

enum class AnalysisKind { eigen, simulate, statics, verify };

struct InputSpec {
  bool active = false;
  std::string side;  // plate side name or beam end (left/right)
  std::string kind;  // plate: shear/moment or velocity/normal_velocity; beam: port label
  double amplitude = 1.0;
  double frequency = 1.0;  // Hz, u = amplitude sin(2 pi f t)
};

struct ScenarioConfig {
  std::string source = "<config>";
  bool plate = true;
  ControlVariant variant = ControlVariant::force;
  double a = 1.0, b = 1.0, length = 1.0;
  int nx = 8, ny = 8, elements = 16;
  CurvatureSpace curvature = CurvatureSpace::dq3;
  MaterialParams material;
  std::array<BoundaryCondition, 4> sides{BoundaryCondition::free, BoundaryCondition::free,
                                         BoundaryCondition::free, BoundaryCondition::free};
  BoundaryCondition left = BoundaryCondition::clamped, right = BoundaryCondition::free;
  InputSpec input;
  double gravity = 0.0;
  AnalysisKind analysis = AnalysisKind::eigen;
  int modes = 5;
  std::string scheme = "midpoint";
  double dt = 1e-3;
  int steps = 100;
  int snapshot_every = 0;
  std::string initial = "mode";
  int initial_mode = 1;
  double initial_amplitude = 1.0;
  unsigned seed = 1;
  std::string output_dir = "phplate_out";
};

namespace detail {

inline BoundaryCondition parse_bc(IniDocument& doc, const std::string& key, const std::string& fallback) {
  const std::string v = doc.get_choice("boundary", key, fallback,
                                       {"clamped", "simply_supported", "free", "input_signal"});
  if (v == "clamped") return BoundaryCondition::clamped;
  if (v == "simply_supported") return BoundaryCondition::simply_supported;
  if (v == "free") return BoundaryCondition::free;
  return BoundaryCondition::input;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(IniDocument& doc) {
  ScenarioConfig c;
  c.source = doc.source();
  c.plate = doc.get_choice("model", "kind", "plate", {"plate", "beam"}) == "plate";
  c.variant = doc.get_choice("model", "variant", "force", {"force", "kinematic"}) == "force"
                  ? ControlVariant::force
                  : ControlVariant::kinematic;

  auto positive = [&](const std::string& s, const std::string& k, double v) {
    if (!(v > 0.0)) doc.fail(s, k, "must be > 0");
    return v;
  };
  if (c.plate) {
    c.a = positive("geometry", "a", doc.get_double("geometry", "a", 1.0));
    c.b = positive("geometry", "b", doc.get_double("geometry", "b", 1.0));
    c.nx = doc.get_int("mesh", "nx", 8);
    c.ny = doc.get_int("mesh", "ny", 8);
    if (c.nx < 1) doc.fail("mesh", "nx", "must be >= 1");
    if (c.ny < 1) doc.fail("mesh", "ny", "must be >= 1");
    const std::string space = doc.get_choice("mesh", "curvature_space",
                                             c.variant == ControlVariant::force ? "dq3" : "bfs",
                                             {"dq3", "q2", "bfs"});
    c.curvature = space == "dq3" ? CurvatureSpace::dq3 : space == "q2" ? CurvatureSpace::q2 : CurvatureSpace::bfs;
    if (c.variant == ControlVariant::kinematic && c.curvature != CurvatureSpace::bfs)
      doc.fail("mesh", "curvature_space", "the kinematic variant needs the C1 space 'bfs'");

    c.material.surface_density = doc.get_double("material", "surface_density", 1.0);
    c.material.poisson = doc.get_double("material", "poisson", 0.0);
    if (doc.has("material", "rigidity")) {
      const double d = doc.get_double("material", "rigidity", 1.0);
      if (doc.has("material", "young_modulus") || doc.has("material", "thickness"))
        doc.fail("material", "rigidity", "give either rigidity or young_modulus/thickness");
      if (!(d > 0.0)) doc.fail("material", "rigidity", "must be > 0");
      c.material = MaterialParams::plate_with_rigidity(d, c.material.surface_density, c.material.poisson);
    } else {
      c.material.young_modulus = doc.get_double("material", "young_modulus", 1.0);
      c.material.thickness = doc.get_double("material", "thickness", 1.0);
    }
    for (Side s : all_sides)
      c.sides[static_cast<int>(s)] = detail::parse_bc(doc, std::string(to_string(s)), "free");
  } else {
    c.length = positive("geometry", "length", doc.get_double("geometry", "length", 1.0));
    c.elements = doc.get_int("mesh", "elements", 16);
    if (c.elements < 1) doc.fail("mesh", "elements", "must be >= 1");
    c.material.line_density = doc.get_double("material", "line_density", 1.0);
    c.material.young_modulus = doc.get_double("material", "young_modulus", 1.0);
    c.material.second_moment = doc.get_double("material", "second_moment", 1.0);
    c.left = detail::parse_bc(doc, "left", "clamped");
    c.right = detail::parse_bc(doc, "right", "free");
  }
  c.material.damping = doc.get_double("damping", "r", 0.0);
  try {
    c.material.validate();
  } catch (const std::invalid_argument& e) {
    doc.fail("material", "", e.what());
  }
  if (!c.plate && (!(c.material.line_density > 0.0) || !(c.material.second_moment > 0.0)))
    doc.fail("material", "", "line_density and second_moment must be > 0");

  if (doc.has_section("input")) {
    c.input.active = true;
    c.input.side = doc.require_string("input", "side");
    c.input.kind = doc.require_string("input", "kind");
    c.input.amplitude = doc.get_double("input", "amplitude", 1.0);
    c.input.frequency = doc.get_double("input", "frequency", 1.0);
    if (c.plate) {
      bool known = false;
      for (Side s : all_sides)
        if (c.input.side == to_string(s)) {
          known = true;
          if (c.sides[static_cast<int>(s)] != BoundaryCondition::input)
            doc.fail("input", "side", "side '" + c.input.side + "' is not declared input_signal in [boundary]");
        }
      if (!known) doc.fail("input", "side", "unknown side '" + c.input.side + "'");
      const std::vector<std::string> kinds = c.variant == ControlVariant::force
                                                 ? std::vector<std::string>{"shear", "moment"}
                                                 : std::vector<std::string>{"velocity", "normal_velocity"};
      if (std::find(kinds.begin(), kinds.end(), c.input.kind) == kinds.end())
        doc.fail("input", "kind", "invalid input kind '" + c.input.kind + "' for this variant");
    } else {
      if (c.input.side != "left" && c.input.side != "right")
        doc.fail("input", "side", "beam ends are 'left' and 'right'");
      if ((c.input.side == "left" ? c.left : c.right) != BoundaryCondition::input)
        doc.fail("input", "side", "end '" + c.input.side + "' is not declared input_signal in [boundary]");
      const std::vector<std::string> kinds = c.variant == ControlVariant::force
                                                 ? std::vector<std::string>{"shear", "moment"}
                                                 : std::vector<std::string>{"velocity", "slope_velocity"};
      if (std::find(kinds.begin(), kinds.end(), c.input.kind) == kinds.end())
        doc.fail("input", "kind", "invalid input kind '" + c.input.kind + "' for this variant");
    }
  }
  c.gravity = doc.get_double("load", "gravity", 0.0);

  const std::string analysis = doc.get_choice("analysis", "kind", "eigen", {"eigen", "simulate", "static", "verify"});
  c.analysis = analysis == "eigen" ? AnalysisKind::eigen
               : analysis == "simulate" ? AnalysisKind::simulate
               : analysis == "static"   ? AnalysisKind::statics
                                        : AnalysisKind::verify;
  c.modes = doc.get_int("analysis", "modes", 5);
  if (c.modes < 1) doc.fail("analysis", "modes", "must be >= 1");
  c.seed = static_cast<unsigned>(doc.get_int("analysis", "seed", 1));

  c.scheme = doc.get_choice("integrator", "scheme", "midpoint", {"midpoint", "leapfrog"});
  c.dt = doc.get_double("integrator", "dt", 1e-3);
  c.steps = doc.get_int("integrator", "steps", 100);
  c.snapshot_every = doc.get_int("integrator", "snapshot_every", 0);
  if (c.analysis == AnalysisKind::simulate) {
    if (!(c.dt > 0.0)) doc.fail("integrator", "dt", "must be > 0 for simulate");
    if (c.steps < 1) doc.fail("integrator", "steps", "must be >= 1");
    if (c.scheme == "leapfrog" && (c.material.damping > 0.0 || c.input.active || c.gravity != 0.0))
      doc.fail("integrator", "scheme", "leapfrog needs an undamped, unforced system");
  }
  if (c.snapshot_every < 0) doc.fail("integrator", "snapshot_every", "must be >= 0");
  c.initial = doc.get_choice("initial", "kind", "mode", {"mode", "random", "zero"});
  c.initial_mode = doc.get_int("initial", "mode", 1);
  if (c.initial_mode < 1) doc.fail("initial", "mode", "must be >= 1");
  c.initial_amplitude = doc.get_double("initial", "amplitude", 1.0);
  c.output_dir = doc.get_string("output", "directory", c.output_dir);
  if (c.analysis == AnalysisKind::statics && c.variant == ControlVariant::kinematic && c.input.active)
    doc.fail("input", "", "static analysis supports boundary inputs only in the force variant");
  doc.finish();
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  IniDocument doc = IniDocument::load(path);
  return parse_scenario(doc);
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

struct BuiltModel {
  std::optional<PlatePhSystem> plate;
  std::optional<BeamPhSystem> beam;
  ConstrainedSystem constrained;
  double skew_full = 0.0;
  double skew_constrained = 0.0;
  Eigen::VectorXd signal_pattern;    // reduced input, multiplied by sin(2 pi f t)
  Eigen::VectorXd constant_pattern;  // reduced input held constant (loads)
  double frequency = 0.0;

  const AssembledPhSystem& system() const { return constrained.system; }
  InputSignal input() const {
    const Eigen::VectorXd s = signal_pattern, c = constant_pattern;
    const double f = frequency;
    return [s, c, f](double t) -> Eigen::VectorXd {
      return c + std::sin(2.0 * std::numbers::pi * f * t) * s;
    };
  }
};

inline BuiltModel build_model(const ScenarioConfig& c) {
  std::optional<PlatePhSystem> plate;
  std::optional<BeamPhSystem> beam;
  AssembledPhSystem full = [&] {
    if (c.plate) {
      PlatePhSystem p = assemble_plate(Mesh2D(c.a, c.b, c.nx, c.ny), c.material, c.variant, c.curvature);
      p = attach_damping(std::move(p), c.material.damping);
      if (c.gravity != 0.0) {
        const double fd = -c.material.surface_density * c.gravity;
        p = attach_distributed_load(std::move(p), [fd](Point2) { return fd; });
      }
      plate = p;
      return p.system;
    }
    BeamPhSystem bm = assemble_beam(Mesh1D(c.length, c.elements), c.material, c.variant);
    if (c.material.damping > 0.0)
      bm.system = attach_block_damping(bm.system, 0, SparseMatrix(c.material.damping * bm.mass));
    if (c.gravity != 0.0) {
      Eigen::VectorXd ones = Eigen::VectorXd::Zero(bm.field_dofs());
      for (int i = 0; i < bm.mesh.nodes(); ++i) ones[2 * i] = 1.0;
      Eigen::VectorXd col = Eigen::VectorXd::Zero(bm.system.size());
      col.head(bm.field_dofs()) = -c.material.line_density * c.gravity * (bm.mass * ones);
      bm.system = bm.system.with_appended_input(col, "load");
    }
    beam = bm;
    return bm.system;
  }();

  BuiltModel m{plate, beam,
               plate ? apply_plate_conditions(*plate, c.sides) : apply_beam_conditions(*beam, c.left, c.right),
               0.0, 0.0, {}, {}, 0.0};
  m.skew_full = skew_defect(full.interconnection());
  m.skew_constrained = skew_defect(m.system().interconnection());

  Eigen::VectorXd signal = Eigen::VectorXd::Zero(full.inputs());
  Eigen::VectorXd constant = Eigen::VectorXd::Zero(full.inputs());
  for (int i = 0; i < full.inputs(); ++i)
    if (full.input_labels()[i] == "load") constant[i] = 1.0;
  if (c.input.active) {
    if (plate) {
      const int kind = (c.input.kind == "shear" || c.input.kind == "velocity") ? 0 : 1;
      Side side = Side::bottom;
      for (Side s : all_sides)
        if (c.input.side == to_string(s)) side = s;
      // uniform value along the side: unit value coefficients, zero slopes
      for (int k = 0; k < plate->traces.side_nodes(side); ++k)
        signal[plate->input_column(kind, side, k, 0)] = c.input.amplitude;
    } else {
      const std::string label = c.input.kind + (c.input.side == "left" ? "_0" : "_L");
      for (int i = 0; i < full.inputs(); ++i)
        if (full.input_labels()[i] == label) signal[i] = c.input.amplitude;
    }
  }
  m.signal_pattern = m.constrained.reduce_input(signal);
  m.constant_pattern = m.constrained.reduce_input(constant);
  m.frequency = c.input.frequency;
  return m;
}

// ---------------------------------------------------------------------------
// Oracles used in reports
// ---------------------------------------------------------------------------

/// Roots of g on (lo, hi) located by scanning and bisection.
template <class F>
std::vector<double> bracketed_roots(F g, double lo, double hi, int count, double step = 1e-2) {
  std::vector<double> roots;
  double x0 = lo, g0 = g(x0);
  for (double x1 = lo + step; x1 <= hi && static_cast<int>(roots.size()) < count; x1 += step) {
    const double g1 = g(x1);
    if (g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
      double l = x0, r = x1;
      for (int it = 0; it < 200 && r - l > 1e-15 * r; ++it) {
        const double m = 0.5 * (l + r);
        ((g(l) < 0.0) != (g(m) < 0.0) ? r : l) = m;
      }
      roots.push_back(0.5 * (l + r));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

/// Closed-form angular frequencies when available (empty otherwise).
inline std::vector<double> oracle_frequencies(const ScenarioConfig& c, int count) {
  std::vector<double> out;
  if (c.plate) {
    for (BoundaryCondition bc : c.sides)
      if (bc != BoundaryCondition::simply_supported) return out;
    const double scale = std::sqrt(bending_rigidity(c.material) / c.material.surface_density);
    for (int m = 1; m <= count + 2; ++m)
      for (int n = 1; n <= count + 2; ++n)
        out.push_back(std::numbers::pi * std::numbers::pi * (m * m / (c.a * c.a) + n * n / (c.b * c.b)) * scale);
    std::sort(out.begin(), out.end());
    out.resize(count);
    return out;
  }
  const double scale = std::sqrt(c.material.flexural_rigidity() / c.material.line_density) / (c.length * c.length);
  using BC = BoundaryCondition;
  auto is = [&](BC l, BC r) { return (c.left == l && c.right == r) || (c.left == r && c.right == l); };
  std::vector<double> beta;
  if (is(BC::clamped, BC::free))
    beta = bracketed_roots([](double x) { return std::cos(x) + 1.0 / std::cosh(x); }, 0.1, 100.0, count);
  else if (is(BC::clamped, BC::clamped))
    beta = bracketed_roots([](double x) { return std::cos(x) - 1.0 / std::cosh(x); }, 0.1, 100.0, count);
  else if (is(BC::simply_supported, BC::simply_supported))
    for (int n = 1; n <= count; ++n) beta.push_back(n * std::numbers::pi);
  for (double b : beta) out.push_back(b * b * scale);
  return out;
}

// ---------------------------------------------------------------------------
// Field export
// ---------------------------------------------------------------------------

/// Structured-grid text: header, grid dimensions, field names, then one line
/// per node "x y f1 f2 ..." with x running fastest.
inline void write_plate_fields(std::ostream& os, const PlatePhSystem& plate,
                               const std::vector<std::pair<std::string, Eigen::VectorXd>>& deflection_fields,
                               const std::vector<std::pair<std::string, Eigen::VectorXd>>& curvature_fields) {
  const Mesh2D& m = plate.mesh;
  os << "STRUCTURED_GRID\n" << "dimensions " << m.nx() + 1 << " " << m.ny() + 1 << "\nfields x y";
  for (const auto& f : deflection_fields) os << " " << f.first;
  for (const auto& f : curvature_fields) os << " " << f.first;
  os << "\n" << std::setprecision(12);
  for (int j = 0; j <= m.ny(); ++j)
    for (int i = 0; i <= m.nx(); ++i) {
      const Point2 p = m.node(i, j);
      os << p.x << " " << p.y;
      for (const auto& f : deflection_fields) os << " " << evaluate_field(*plate.deflection, f.second, p).v;
      for (const auto& f : curvature_fields) os << " " << evaluate_field(*plate.curvature, f.second, p).v;
      os << "\n";
    }
}

inline void write_beam_fields(std::ostream& os, const BeamPhSystem& beam,
                              const std::vector<std::pair<std::string, Eigen::VectorXd>>& fields) {
  os << "STRUCTURED_GRID\n" << "dimensions " << beam.mesh.nodes() << " 1\nfields x y";
  for (const auto& f : fields) os << " " << f.first;
  os << "\n" << std::setprecision(12);
  for (int i = 0; i < beam.mesh.nodes(); ++i) {
    os << beam.mesh.node(i) << " 0";
    for (const auto& f : fields) os << " " << f.second[2 * i];
    os << "\n";
  }
}

/// Writes velocity and moment (curvature effort) fields of an unconstrained
/// effort vector.
inline void write_effort_snapshot(std::ostream& os, const BuiltModel& m, const Eigen::VectorXd& full_effort) {
  if (m.plate) {
    const int n1 = m.plate->n1(), nc = m.plate->nc();
    write_plate_fields(os, *m.plate, {{"velocity", full_effort.head(n1)}},
                       {{"mxx", full_effort.segment(n1, nc)},
                        {"myy", full_effort.segment(n1 + nc, nc)},
                        {"mxy", full_effort.segment(n1 + 2 * nc, nc)}});
  } else {
    const int n = m.beam->field_dofs();
    write_beam_fields(os, *m.beam, {{"velocity", full_effort.head(n)}, {"moment", full_effort.tail(n)}});
  }
}

// ---------------------------------------------------------------------------
// Analyses
// ---------------------------------------------------------------------------

struct Invariant {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
};

struct RunOutcome {
  Report report;
  std::vector<Invariant> invariants;
  bool all_pass() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const Invariant& i) { return i.pass; });
  }
};

inline void add_invariant(RunOutcome& out, std::string name, double value, double threshold) {
  out.invariants.push_back({std::move(name), value, threshold, value <= threshold});
}

inline void finalize_report(RunOutcome& out) {
  Report inv = Report::array();
  for (const auto& i : out.invariants)
    inv.push_back({{"name", i.name}, {"value", i.value}, {"threshold", i.threshold}, {"pass", i.pass}});
  out.report["invariants"] = inv;
  out.report["passed"] = out.all_pass();
}

inline AssembledPhSystem without_damping(const AssembledPhSystem& sys) {
  return sys.with_resistive_port(SparseMatrix(sys.size(), 0), SparseMatrix(0, 0));
}

inline RunOutcome run_eigen(const ScenarioConfig& c, const BuiltModel& m, const std::filesystem::path& dir,
                            std::ostream& log) {
  RunOutcome out;
  const AssembledPhSystem sys = without_damping(m.system());
  const EigenModes modes = eigenmodes(sys, c.modes, true);
  if (modes.zero_modes > 0) log << modes.zero_modes << " zero-frequency modes skipped\n";
  const auto oracle = oracle_frequencies(c, static_cast<int>(modes.omega.size()));
  std::ofstream csv(dir / "eigen_report.csv");
  csv << "mode,omega[rad/s],frequency[Hz],oracle_omega[rad/s],relative_error\n" << std::setprecision(15);
  log << "mode  omega [rad/s]        frequency [Hz]       oracle [rad/s]       rel. error\n";
  Report rows = Report::array();
  for (int i = 0; i < modes.omega.size(); ++i) {
    const double w = modes.omega[i], hz = modes.hertz[i];
    Report row{{"mode", i + 1}, {"omega_rad_per_s", w}, {"frequency_hz", hz}};
    std::ostringstream line;
    line << std::setprecision(12) << std::left << std::setw(6) << i + 1 << std::setw(21) << w << std::setw(21) << hz;
    csv << i + 1 << "," << w << "," << hz;
    if (i < static_cast<int>(oracle.size())) {
      const double err = std::abs(w - oracle[i]) / oracle[i];
      row["oracle_omega_rad_per_s"] = oracle[i];
      row["relative_error"] = err;
      line << std::setw(21) << oracle[i] << err;
      csv << "," << oracle[i] << "," << err;
    } else {
      line << std::setw(21) << "n/a" << "n/a";
      csv << ",,";
    }
    csv << "\n";
    log << line.str() << "\n";
    rows.push_back(row);
  }
  out.report["zero_frequency_modes"] = modes.zero_modes;
  out.report["modes"] = rows;
  out.report["units"] = {{"omega", "rad/s"}, {"frequency", "Hz"}};
  add_invariant(out, "eigen_residual", modes.residual, 1e-8);
  add_invariant(out, "negative_eigenvalue", std::max(0.0, -modes.min_eigenvalue / modes.max_eigenvalue), 1e-10);
  if (sys.size() <= 1200) {
    const Eigen::VectorXcd lambda = first_order_spectrum(sys);
    const double re = lambda.real().cwiseAbs().maxCoeff(), im = lambda.imag().cwiseAbs().maxCoeff();
    add_invariant(out, "spectrum_real_part_ratio", im > 0.0 ? re / im : re, 1e-8);
  }
  // mode shapes (velocity efforts)
  Eigen::VectorXd effort = Eigen::VectorXd::Zero(sys.size());
  std::vector<std::pair<std::string, Eigen::VectorXd>> fields;
  for (int i = 0; i < modes.shapes.cols(); ++i) {
    effort.setZero();
    effort.head(sys.layout().size(0)) = modes.shapes.col(i) / modes.shapes.col(i).cwiseAbs().maxCoeff();
    const Eigen::VectorXd full = m.constrained.expand(effort);
    const int np = m.plate ? m.plate->n1() : m.beam->field_dofs();
    fields.emplace_back("mode" + std::to_string(i + 1), full.head(np));
  }
  std::ofstream f(dir / "modes.txt");
  if (m.plate)
    write_plate_fields(f, *m.plate, fields, {});
  else
    write_beam_fields(f, *m.beam, fields);
  return out;
}

inline Eigen::VectorXd initial_state(const ScenarioConfig& c, const BuiltModel& m) {
  const AssembledPhSystem& sys = m.system();
  if (c.initial == "zero") return Eigen::VectorXd::Zero(sys.size());
  if (c.initial == "random") {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> dist;
    Eigen::VectorXd alpha(sys.size());
    for (int i = 0; i < alpha.size(); ++i) alpha[i] = dist(rng);
    return c.initial_amplitude * (sys.mass() * alpha);
  }
  const AssembledPhSystem undamped = without_damping(sys);
  const EigenModes modes = eigenmodes(undamped, c.initial_mode);
  if (modes.shapes.cols() < c.initial_mode)
    throw ConfigError(c.source, 0, "initial.mode", "system has fewer modes than requested");
  Eigen::VectorXd v = modes.shapes.col(c.initial_mode - 1);
  v /= v.cwiseAbs().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.size());
  x.head(sys.layout().size(0)) = c.initial_amplitude * (reduced_pencil(undamped).mass * v);
  return x;
}

inline RunOutcome run_simulation(const ScenarioConfig& c, const BuiltModel& m, const std::filesystem::path& dir,
                                 std::ostream& log) {
  RunOutcome out;
  const AssembledPhSystem& sys = m.system();
  const Eigen::VectorXd x0 = initial_state(c, m);
  SimulationOptions opt;
  opt.snapshot_every = c.snapshot_every;
  const SimulationTrace trace = c.scheme == "midpoint"
                                    ? implicit_midpoint(sys, x0, m.input(), c.dt, c.steps, opt)
                                    : leapfrog(sys, x0, c.dt, c.steps, opt);
  {
    std::ofstream csv(dir / "trace.csv");
    write_trace_csv(csv, trace, sys.input_labels());
  }
  for (const auto& [step, x] : trace.snapshots) {
    std::ostringstream name;
    name << "field_" << std::setw(6) << std::setfill('0') << step << ".txt";
    std::ofstream f(dir / name.str());
    write_effort_snapshot(f, m, m.constrained.expand(coenergy(sys, x)));
  }
  const bool forced = m.signal_pattern.lpNorm<Eigen::Infinity>() != 0.0 ||
                      m.constant_pattern.lpNorm<Eigen::Infinity>() != 0.0;
  const bool damped = sys.has_dissipation();
  out.report["scheme"] = c.scheme;
  out.report["steps"] = trace.steps();
  out.report["dt_s"] = c.dt;
  out.report["initial_energy_J"] = trace.hamiltonian.front();
  out.report["final_energy_J"] = trace.hamiltonian.back();
  out.report["max_relative_drift"] = trace.max_relative_drift();
  out.report["max_step_residual"] = trace.max_residual();
  out.report["diverged"] = trace.diverged;
  log << "steps " << trace.steps() << ", H_d(0) = " << trace.hamiltonian.front()
      << " J, H_d(end) = " << trace.hamiltonian.back() << " J\n";
  add_invariant(out, "diverged", trace.diverged ? 1.0 : 0.0, 0.0);
  if (c.scheme == "midpoint") {
    add_invariant(out, "step_power_residual", trace.max_residual(), 1e-10);
    if (!forced && !damped) add_invariant(out, "energy_drift", trace.max_relative_drift(), 1e-12);
    if (!forced && damped) {
      double rise = 0.0;
      for (std::size_t k = 1; k < trace.hamiltonian.size(); ++k)
        rise = std::max(rise, trace.hamiltonian[k] - trace.hamiltonian[k - 1]);
      add_invariant(out, "energy_increase", rise / std::max(trace.hamiltonian.front(), 1e-300), 0.0);
    }
  }
  return out;
}

inline RunOutcome run_static(const ScenarioConfig&, const BuiltModel& m, const std::filesystem::path& dir,
                             std::ostream& log) {
  RunOutcome out;
  const AssembledPhSystem& sys = m.system();
  const Eigen::VectorXd u = m.constant_pattern + m.signal_pattern;
  const Eigen::VectorXd d = static_response(sys, u);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(sys.size());
  padded.head(d.size()) = d;
  const Eigen::VectorXd full = m.constrained.expand(padded);
  std::ofstream f(dir / "deflection.txt");
  double wmax = 0.0;
  if (m.plate) {
    const Eigen::VectorXd w = full.head(m.plate->n1());
    write_plate_fields(f, *m.plate, {{"deflection", w}}, {});
    for (int i = 0; i < m.plate->mesh.nodes(); ++i) wmax = std::max(wmax, std::abs(w[4 * i]));
  } else {
    const Eigen::VectorXd w = full.head(m.beam->field_dofs());
    write_beam_fields(f, *m.beam, {{"deflection", w}});
    for (int i = 0; i < m.beam->mesh.nodes(); ++i) wmax = std::max(wmax, std::abs(w[2 * i]));
  }
  out.report["max_abs_nodal_deflection_m"] = wmax;
  log << "max |w| at nodes: " << std::setprecision(12) << wmax << " m\n";
  return out;
}

/// Structural checks on analytic fields and small assembled systems.
inline RunOutcome run_verification(unsigned seed, std::ostream& log) {
  RunOutcome out;
  std::mt19937_64 rng(seed);

  double adj = 0.0;
  for (int i = 0; i < 20; ++i) adj = std::max(adj, check_adjointness(random_test_fields(rng)).residual);
  TestFieldSpec constant = random_test_fields(rng);
  constant.tensor = {constant_field(1.3), constant_field(-0.4), constant_field(0.7)};
  const AdjointnessResult cr = check_adjointness(constant);
  out.report["adjointness"] = {{"pairs", 20},
                               {"max_relative_residual", adj},
                               {"constant_tensor_div_div_side", cr.div_div_side},
                               {"constant_tensor_hessian_side", cr.hessian_side}};
  add_invariant(out, "adjointness_residual", adj, 1e-8);
  add_invariant(out, "constant_tensor_div_div_side", std::abs(cr.div_div_side), 0.0);
  add_invariant(out, "constant_tensor_hessian_side", std::abs(cr.hessian_side) / cr.scale, 1e-12);

  double plate_pair = 0.0, beam_pair = 0.0, bpartial = 0.0;
  for (int i = 0; i < 10; ++i) {
    auto field = [&] {
      return PlateEffortField{random_smooth_field(rng), random_smooth_field(rng), random_smooth_field(rng),
                              random_smooth_field(rng)};
    };
    const PlateEffortField ea = field(), eb = field();
    plate_pair = std::max(plate_pair, check_plate_pairing(ea, eb, 1.0, 1.3).relative());
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (Point2 p : {Point2{u(rng), 0.0}, Point2{1.0, 1.3 * u(rng)}, Point2{u(rng), 1.3}, Point2{0.0, 1.3 * u(rng)}}) {
      const BpartialCheck z = check_bpartial(ea, p, 1.0, 1.3);
      double mag = 1.0;
      for (double v : z.quantity_form) mag = std::max(mag, std::abs(v));
      bpartial = std::max(bpartial, z.max_difference / mag);
    }
    const auto ba = beam_structure_element(random_smooth_field_1d(rng), random_smooth_field_1d(rng), 1.0);
    const auto bb = beam_structure_element(random_smooth_field_1d(rng), random_smooth_field_1d(rng), 1.0);
    beam_pair = std::max(beam_pair, beam_pairing(ba, bb, 1.0).relative());
  }
  out.report["plate_pairing_max_relative"] = plate_pair;
  out.report["beam_pairing_max_relative"] = beam_pair;
  out.report["bpartial_max_relative_difference"] = bpartial;
  add_invariant(out, "plate_pairing", plate_pair, 1e-6);
  add_invariant(out, "beam_pairing", beam_pair, 1e-6);
  add_invariant(out, "bpartial_consistency", bpartial, 1e-12);

  // assembled systems: exact skew symmetry and algebraic power balance
  const MaterialParams p = MaterialParams::plate_with_rigidity(1.0, 1.0, 0.3);
  std::vector<std::pair<std::string, AssembledPhSystem>> systems;
  systems.emplace_back("plate_force_dq3", attach_damping(assemble_plate_force_control(Mesh2D(1, 1, 4, 4), p), 0.5).system);
  systems.emplace_back("plate_force_q2",
                       assemble_plate_force_control(Mesh2D(1, 1, 4, 4), p, CurvatureSpace::q2).system);
  systems.emplace_back("plate_kinematic", attach_damping(assemble_plate_kinematic_control(Mesh2D(1, 1, 3, 3), p), 0.5).system);
  systems.emplace_back("beam_force", assemble_beam(Mesh1D(1.0, 8), MaterialParams{}, ControlVariant::force).system);
  systems.emplace_back("beam_kinematic",
                       assemble_beam(Mesh1D(1.0, 8), MaterialParams{}, ControlVariant::kinematic).system);
  double skew = 0.0, balance = 0.0;
  std::normal_distribution<double> g;
  for (const auto& [name, sys] : systems) {
    skew = std::max(skew, skew_defect(sys.interconnection()));
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x(sys.size()), u(sys.inputs());
      for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
      for (int i = 0; i < u.size(); ++i) u[i] = g(rng);
      const DynamicsResult d = dynamics(sys, x, u);
      const double a = d.rate.dot(d.effort), b = d.output.dot(u);
      const double scale = d.rate.cwiseProduct(d.effort).cwiseAbs().sum() +
                           d.output.cwiseProduct(u).cwiseAbs().sum() + d.dissipation;
      balance = std::max(balance, std::abs(a - b + d.dissipation) / scale);
    }
  }
  out.report["max_skew_defect"] = skew;
  out.report["max_power_balance_residual"] = balance;
  add_invariant(out, "skew_defect", skew, 0.0);
  add_invariant(out, "power_balance", balance, 1e-10);
  log << "adjointness " << adj << ", plate pairing " << plate_pair << ", beam pairing " << beam_pair
      << ", B_partial " << bpartial << ", skew " << skew << ", power balance " << balance << "\n";
  return out;
}

enum ExitCode { exit_ok = 0, exit_config = 2, exit_solver = 3, exit_invariant = 4 };

/// Runs one scenario, writing artifacts into `dir`. Returns the exit code.
inline int run_scenario(const ScenarioConfig& c, const std::filesystem::path& dir, bool strict, std::ostream& log,
                        std::ostream& err) {
  try {
    std::filesystem::create_directories(dir);
    RunOutcome out;
    if (c.analysis == AnalysisKind::verify) {
      out = run_verification(c.seed, log);
    } else {
      const BuiltModel m = build_model(c);
      log << (c.plate ? "plate" : "beam") << " (" << to_string(c.variant) << " control), "
          << m.system().size() << " dofs, " << m.system().inputs() << " inputs\n";
      if (c.analysis == AnalysisKind::eigen)
        out = run_eigen(c, m, dir, log);
      else if (c.analysis == AnalysisKind::simulate)
        out = run_simulation(c, m, dir, log);
      else
        out = run_static(c, m, dir, log);
      Report head;
      head["model"] = c.plate ? "plate" : "beam";
      head["variant"] = to_string(c.variant);
      head["dofs"] = m.system().size();
      head["inputs"] = m.system().input_labels();
      head["skew_defect_full"] = m.skew_full;
      head["skew_defect_constrained"] = m.skew_constrained;
      head.update(out.report);
      out.report = std::move(head);
      add_invariant(out, "skew_defect", std::max(m.skew_full, m.skew_constrained), 0.0);
    }
    finalize_report(out);
    Report final_report{{"scenario", c.source}};
    final_report.update(out.report);
    std::ofstream(dir / "report.json") << final_report.dump(2) << "\n";
    for (const auto& i : out.invariants)
      if (!i.pass) err << "invariant violated: " << i.name << " = " << i.value << " (threshold " << i.threshold << ")\n";
    return strict && !out.all_pass() ? exit_invariant : exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << " (residual " << e.residual() << ")\n";
    return exit_solver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_solver;
  }
}

}  // namespace phplate
