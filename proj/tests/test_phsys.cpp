#include <gtest/gtest.h>

#include <random>

#include "phplate/beam.hpp"
#include "phplate/plate.hpp"

using namespace phplate;

namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

/// Mass-spring oscillator: p' = -k q + u, q' = p / m.
AssembledPhSystem oscillator(double m, double k, const Eigen::Matrix2d& mass = Eigen::Matrix2d::Identity()) {
  Eigen::Matrix2d j, kk;
  j << 0, -1, 1, 0;
  kk << 1.0 / m, 0, 0, k;
  // energy in a = M^{-1} x: K_a = M K_x M keeps H = 1/2 x^T K_x x
  const Eigen::Matrix2d ka = mass * kk * mass;
  Eigen::MatrixXd b(2, 1);
  b << 1, 0;
  return AssembledPhSystem(BlockLayout({"p", "q"}, {1, 1}), dense_to_sparse(mass), dense_to_sparse(j),
                           dense_to_sparse(ka), dense_to_sparse(b), {"force"});
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

}  // namespace

TEST(BlockLayout, OffsetsAndLookup) {
  const BlockLayout l({"a", "b", "c"}, {2, 0, 3});
  EXPECT_EQ(l.total(), 5);
  EXPECT_EQ(l.offset(2), 2);
  EXPECT_EQ(l.block_of(1), 0);
  EXPECT_EQ(l.block_of(2), 2);
  EXPECT_THROW(l.block_of(5), std::out_of_range);
  EXPECT_THROW(BlockLayout({"a"}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(PhStateVector(l, Eigen::VectorXd::Zero(4)), std::invalid_argument);
  PhStateVector x(l);
  x.block(2)[1] = 7.0;
  EXPECT_EQ(x.values()[3], 7.0);
}

TEST(AssembledPhSystem, OscillatorCoenergyAndHamiltonian) {
  const AssembledPhSystem s = oscillator(2.0, 3.0);
  const Eigen::Vector2d x(4.0, 0.5);
  const Eigen::VectorXd e = coenergy(s, x);
  EXPECT_DOUBLE_EQ(e[0], 2.0);
  EXPECT_DOUBLE_EQ(e[1], 1.5);
  EXPECT_DOUBLE_EQ(hamiltonian(s, x), 0.5 * 16.0 / 2.0 + 0.5 * 3.0 * 0.25);
  EXPECT_DOUBLE_EQ(hamiltonian(s, Eigen::Vector2d::Zero()), 0.0);
  const DynamicsResult d = dynamics(s, x, Eigen::VectorXd::Constant(1, 0.25));
  EXPECT_DOUBLE_EQ(d.rate[0], -1.5 + 0.25);
  EXPECT_DOUBLE_EQ(d.rate[1], 2.0);
  EXPECT_DOUBLE_EQ(d.output[0], 2.0);
}

TEST(AssembledPhSystem, NonIdentityMassKeepsHamiltonian) {
  Eigen::Matrix2d m;
  m << 2.0, 0.0, 0.0, 0.5;
  const AssembledPhSystem s = oscillator(1.5, 4.0, m);
  const Eigen::Vector2d x(1.0, -2.0);
  EXPECT_NEAR(hamiltonian(s, x), 0.5 / 1.5 + 0.5 * 4.0 * 4.0, 1e-14);
}

TEST(AssembledPhSystem, SizeAndStructureErrors) {
  const AssembledPhSystem s = oscillator(1.0, 1.0);
  EXPECT_THROW(coenergy(s, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(dynamics(s, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_THROW(hamiltonian(s, Eigen::VectorXd::Zero(1)), std::invalid_argument);
  EXPECT_THROW(s.with_appended_input(Eigen::VectorXd::Zero(5), "x"), std::invalid_argument);
  EXPECT_THROW(s.with_resistive_port(SparseMatrix(2, 1), SparseMatrix(2, 2)), std::invalid_argument);
  Eigen::MatrixXd asym(1, 1);
  asym << 1.0;
  EXPECT_NO_THROW(s.with_resistive_port(dense_to_sparse(Eigen::MatrixXd::Ones(2, 1)), dense_to_sparse(asym)));
  const SparseMatrix i2 = dense_to_sparse(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(AssembledPhSystem(BlockLayout({"p"}, {2}), i2, i2, i2, SparseMatrix(2, 1), {}), std::invalid_argument);
  EXPECT_THROW(AssembledPhSystem(BlockLayout({"p"}, {3}), i2, i2, i2, SparseMatrix(2, 0), {}), std::invalid_argument);
}

TEST(AssembledPhSystem, NonDefiniteMassIsAnAssemblyDefect) {
  Eigen::Matrix2d m;
  m << 1.0, 0.0, 0.0, -1.0;
  const SparseMatrix i2 = dense_to_sparse(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(AssembledPhSystem(BlockLayout({"p", "q"}, {1, 1}), dense_to_sparse(m), SparseMatrix(2, 2), i2,
                                 SparseMatrix(2, 0), {}),
               SolverError);
}

TEST(Dynamics, DampingDissipatesAndBalancesPower) {
  const BeamPhSystem beam = assemble_beam(Mesh1D(1.0, 5), MaterialParams{}, ControlVariant::force);
  const AssembledPhSystem s = attach_block_damping(beam.system, 0, SparseMatrix(0.3 * beam.mass));
  EXPECT_TRUE(s.has_dissipation());
  EXPECT_THROW(attach_block_damping(beam.system, 0, SparseMatrix(3, 3)), std::invalid_argument);
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = random_vector(rng, s.size()), u = random_vector(rng, 4);
    const DynamicsResult d = dynamics(s, x, u);
    EXPECT_GE(d.dissipation, 0.0);
    const double dh = d.rate.dot(d.effort), balance = d.output.dot(u) - d.dissipation;
    EXPECT_NEAR(dh, balance, 1e-11 * (std::abs(dh) + std::abs(balance) + d.dissipation));
    const DynamicsResult free = dynamics(s, x, Eigen::VectorXd::Zero(4));
    EXPECT_LE(free.rate.dot(free.effort), 1e-12 * free.dissipation);
  }
}

TEST(Dynamics, ZeroStateZeroInput) {
  const BeamPhSystem beam = assemble_beam(Mesh1D(1.0, 3), MaterialParams{}, ControlVariant::kinematic);
  const DynamicsResult d = dynamics(beam.system, Eigen::VectorXd::Zero(beam.system.size()), Eigen::VectorXd::Zero(4));
  EXPECT_EQ(d.rate.norm(), 0.0);
  EXPECT_EQ(d.output.norm(), 0.0);
}

TEST(Coenergy, MatchesFiniteDifferenceGradient) {
  const PlatePhSystem plate =
      assemble_plate_force_control(Mesh2D(1.0, 1.0, 2, 2), MaterialParams::plate_with_rigidity(1.5, 0.7, 0.3));
  const AssembledPhSystem& s = plate.system;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::VectorXd x = random_vector(rng, s.size()), dir = random_vector(rng, s.size());
    const double h = 1e-4;
    const double fd = (hamiltonian(s, x + h * dir) - hamiltonian(s, x - h * dir)) / (2 * h);
    const double an = coenergy(s, x).dot(dir);
    EXPECT_NEAR(fd, an, 1e-7 * std::abs(an));
  }
}

TEST(Eigenmodes, OscillatorAndErrors) {
  const AssembledPhSystem s = oscillator(2.0, 8.0);
  const EigenModes m = eigenmodes(s);
  ASSERT_EQ(m.omega.size(), 1);
  EXPECT_NEAR(m.omega[0], 2.0, 1e-14);
  EXPECT_NEAR(m.hertz[0], 1.0 / std::numbers::pi, 1e-14);
  const AssembledPhSystem damped = attach_block_damping(s, 0, dense_to_sparse(Eigen::MatrixXd::Ones(1, 1)));
  EXPECT_THROW(eigenmodes(damped), std::invalid_argument);
  EXPECT_THROW(reduced_pencil(AssembledPhSystem(BlockLayout({"p"}, {2}), s.mass(), s.interconnection(),
                                                s.energy(), SparseMatrix(2, 0), {})),
               std::invalid_argument);
}

TEST(FirstOrderSpectrum, UndampedIsImaginaryDampedIsStable) {
  const BeamPhSystem beam = assemble_beam(Mesh1D(1.0, 4), MaterialParams{}, ControlVariant::force);
  const ConstrainedSystem c = apply_beam_conditions(beam, BoundaryCondition::clamped, BoundaryCondition::free);
  const Eigen::VectorXcd lam = first_order_spectrum(c.system);
  const double big = lam.cwiseAbs().maxCoeff();
  EXPECT_LT(lam.real().cwiseAbs().maxCoeff(), 1e-8 * big);
  const EigenModes m = eigenmodes(c.system, 1);
  double closest = 1e300;
  for (auto z : lam) closest = std::min(closest, std::abs(std::abs(z.imag()) - m.omega[0]));
  EXPECT_LT(closest, 1e-8 * m.omega[0]);

  const AssembledPhSystem damped = attach_block_damping(c.system, 0, SparseMatrix(0.2 * submatrix(c.system.mass(),
      iota_range(0, c.system.layout().size(0)), iota_range(0, c.system.layout().size(0)))));
  const Eigen::VectorXcd ld = first_order_spectrum(damped);
  EXPECT_LT(ld.real().maxCoeff(), 1e-10 * big);
  EXPECT_LT(ld.real().minCoeff(), -1e-3);
}

TEST(StaticResponse, CantileverTipLoadAndErrors) {
  const double len = 2.0, ei = 3.0, force = 0.7;
  MaterialParams p;
  p.young_modulus = ei;
  const BeamPhSystem beam = assemble_beam(Mesh1D(len, 4), p, ControlVariant::force);
  const ConstrainedSystem c = apply_beam_conditions(beam, BoundaryCondition::clamped, BoundaryCondition::input);
  // columns: shear_L, moment_L
  const Eigen::VectorXd d = static_response(c.system, Eigen::Vector2d(force, 0.0));
  const Eigen::VectorXd w = c.expand(Eigen::VectorXd(
      (Eigen::VectorXd(c.system.size()) << d, Eigen::VectorXd::Zero(c.system.size() - d.size())).finished()));
  EXPECT_NEAR(w[2 * 4], force * len * len * len / (3 * ei), 1e-12);
  EXPECT_NEAR(w[2 * 4 + 1], force * len * len / (2 * ei), 1e-12);
  EXPECT_THROW(static_response(c.system, Eigen::VectorXd::Zero(3)), std::invalid_argument);

  const ConstrainedSystem freefree = apply_beam_conditions(beam, BoundaryCondition::free, BoundaryCondition::input);
  EXPECT_THROW(static_response(freefree.system, Eigen::Vector2d(1.0, 0.0)), SolverError);
  const BeamPhSystem k = assemble_beam(Mesh1D(len, 4), p, ControlVariant::kinematic);
  EXPECT_THROW(static_response(k.system, Eigen::Vector4d(1, 0, 0, 0)), std::invalid_argument);
}

TEST(ConstrainedSystem, ExpandReduceRoundTrip) {
  const BeamPhSystem beam = assemble_beam(Mesh1D(1.0, 3), MaterialParams{}, ControlVariant::force);
  const ConstrainedSystem c = apply_beam_conditions(beam, BoundaryCondition::simply_supported, BoundaryCondition::input);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd r = random_vector(rng, c.system.size());
  EXPECT_EQ(c.reduce(c.expand(r)), r);
  EXPECT_EQ(c.expand(r)[0], 0.0);
  EXPECT_THROW(c.expand(Eigen::VectorXd::Zero(1)), std::invalid_argument);
  EXPECT_THROW(c.reduce_input(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_EQ(c.reduce_input(Eigen::Vector4d(1, 2, 3, 4)), Eigen::Vector2d(3, 4));
}
