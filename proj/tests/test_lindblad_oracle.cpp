#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qpdrec/lindblad_oracle.hpp"

using namespace qpdrec;

namespace {

ModelParams params(double chi, double g, double big_g, double theta, Index dim) {
  ModelParams p;
  p.chi = chi;
  p.field_decay = g;
  p.atom_decay = big_g;
  p.theta = theta;
  p.dim = dim;
  return p;
}

Index idx(Index atom_level, Index photons, Index n) { return atom_level * n + photons; }

}  // namespace

TEST(Liouvillian, GroundVacuumIsStationary) {
  const Index n = 6;
  Matrix rho = Matrix::Zero(2 * n, 2 * n);
  rho(idx(kGround, 0, n), idx(kGround, 0, n)) = 1.0;
  EXPECT_LT(max_abs(liouvillian_apply(rho, params(1.3, 0.2, 0.4, 0.5, n))), 1e-15);
}

TEST(Liouvillian, CommutatorOnMatrixUnit) {
  const Index n = 3;
  Matrix unit = Matrix::Zero(2 * n, 2 * n);
  unit(idx(kExcited, 1, n), idx(kGround, 0, n)) = 1.0;
  // -i [n sz, |e,1><g,0|] = -i (1 * 1 - 0 * (-1)) |e,1><g,0|
  EXPECT_LT(max_abs(liouvillian_apply(unit, params(1.0, 0.0, 0.0, 0.5, n)) - (-kI) * unit), 1e-15);
}

TEST(Liouvillian, StructuredMatchesDenseOnRandomMatrices) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + trial;
    const ModelParams p = params(0.5 + 0.2 * trial, 0.03 * trial, 0.05 * (10 - trial), 0.3, n);
    Matrix m(2 * n, 2 * n);
    for (Index i = 0; i < 2 * n; ++i)
      for (Index j = 0; j < 2 * n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    EXPECT_LT(max_abs(liouvillian_apply(m, p) - liouvillian_apply_dense(m, p)), 1e-12);
  }
}

TEST(Liouvillian, PreservesTraceAndHermiticity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 7;
    const ModelParams p = params(1.0, 0.1 * (trial % 4), 0.2 * (trial % 3), 0.7, n);
    const Matrix h = oracle::random_hermitian(static_cast<int>(2 * n), rng);
    const Matrix out = liouvillian_apply(h, p);
    EXPECT_LT(std::abs(out.trace()), 1e-12);
    EXPECT_LT(hermiticity_error(out), 1e-12);
  }
}

TEST(Liouvillian, RejectsMismatchedDimension) {
  EXPECT_THROW(liouvillian_apply(Matrix::Zero(6, 6), params(1, 0, 0, 0.5, 4)), InvalidArgument);
}

TEST(EvolveRk4, PhotonNumberDecaysExponentially) {
  const Index n = 20;
  const ModelParams p = params(1.0, 0.1, 0.2, 0.6, n);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), coherent_state({1.0, 0.0}, n));
  const Matrix num = tensor_atom_field(atom::identity(), ladder_ops(n).number).matrix();
  for (double t : {0.5, 2.0}) {
    const EvolutionResult r = evolve_rk4(rho0, p, t, {});
    const double mean_n = (r.state.matrix() * num).trace().real();
    EXPECT_NEAR(mean_n, std::exp(-2.0 * p.field_decay * t), 1e-6);
  }
}

TEST(EvolveRk4, ExcitedPopulationDecaysAtTwiceGamma) {
  const Index n = 4;
  const ModelParams p = params(1.0, 0.0, 0.3, 0.9, n);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), fock_state(2, n));
  const double t = 1.5;
  const EvolutionResult r = evolve_rk4(rho0, p, t, {});
  const double pe = r.state.block(kExcited, kExcited).trace().real();
  EXPECT_NEAR(pe, std::sin(p.theta) * std::sin(p.theta) * std::exp(-2.0 * p.atom_decay * t), 1e-10);
}

TEST(EvolveRk4, UnitaryDynamicsKeepsPopulations) {
  const Index n = 10;
  const ModelParams p = params(1.7, 0.0, 0.0, 0.4, n);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), coherent_state({0.6, 0.4}, n));
  const EvolutionResult r = evolve_rk4(rho0, p, 2.0, {});
  for (Index i = 0; i < 2 * n; ++i) EXPECT_NEAR(std::abs(r.state.matrix()(i, i) - rho0.matrix()(i, i)), 0.0, 1e-12);
}

TEST(EvolveRk4, FourthOrderConvergence) {
  const Index n = 8;
  const ModelParams p = params(2.0, 0.1, 0.2, 0.6, n);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), coherent_state({0.7, 0.2}, n));
  const double t = 1.0;
  IntegratorConfig fine;
  fine.dt = 1.0 / 1280.0;
  const Matrix ref = evolve_rk4(rho0, p, t, fine).state.matrix();
  IntegratorConfig c1;
  c1.dt = 0.05;
  IntegratorConfig c2;
  c2.dt = 0.025;
  const double e1 = max_abs(evolve_rk4(rho0, p, t, c1).state.matrix() - ref);
  const double e2 = max_abs(evolve_rk4(rho0, p, t, c2).state.matrix() - ref);
  EXPECT_GT(e1 / e2, 13.0);
  EXPECT_LT(e1 / e2, 19.0);
}

TEST(EvolveRk4, ZeroTimeIsIdentityAndShortHorizonRejected) {
  const ModelParams p = params(1.0, 0.1, 0.1, 0.6, 4);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), fock_state(1, 4));
  const EvolutionResult r = evolve_rk4(rho0, p, 0.0, {});
  EXPECT_EQ(r.steps, 0);
  EXPECT_LT(max_abs(r.state.matrix() - rho0.matrix()), 0.0 + 1e-300);
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  EXPECT_THROW(evolve_rk4(rho0, p, 0.05, cfg), InvalidArgument);
}

TEST(EvolveRk4, LandsExactlyOnFinalTime) {
  const ModelParams p = params(1.0, 0.05, 0.1, 0.6, 6);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), fock_state(2, 6));
  IntegratorConfig cfg;
  cfg.dt = 0.3;
  double last = -1.0;
  long calls = 0;
  const EvolutionResult r = evolve_rk4(rho0, p, 1.0, cfg, [&](double t, const Matrix&) {
    last = t;
    ++calls;
  });
  EXPECT_EQ(r.steps, 4);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(last, 1.0);
}

TEST(EvolveRk4, DivergentStepRaisesIntegrationError) {
  const Index n = 40;
  const ModelParams p = params(1.0, 0.05, 0.1, 0.6, n);
  const JointDensityMatrix rho0 = product_state(atom::superposition_state(p.theta), coherent_state({3.0, 0.0}, n));
  IntegratorConfig cfg;
  cfg.dt = 0.5;
  // Coherences grow without bound; the trace itself is conserved by every step.
  EXPECT_THROW(evolve_rk4(rho0, p, 200.0, cfg), IntegrationError);
}

TEST(SigmaX, ProductStateValue) {
  for (double theta : {0.0, 0.2, kPi / 4.0, 1.3}) {
    const JointDensityMatrix rho = product_state(atom::superposition_state(theta), coherent_state({0.3, 0.1}, 8));
    EXPECT_NEAR(sigma_x_trace(rho), 0.5 * std::sin(2.0 * theta), 1e-12);
  }
}

TEST(ModelParams, Validation) {
  EXPECT_THROW(params(0.0, 0, 0, 0.5, 4).validate(), InvalidArgument);
  EXPECT_THROW(params(1.0, -0.1, 0, 0.5, 4).validate(), InvalidArgument);
  EXPECT_THROW(params(1.0, 0, -1, 0.5, 4).validate(), InvalidArgument);
  EXPECT_THROW(params(1.0, 0, 0, 2.0, 4).validate(), InvalidArgument);
  EXPECT_THROW(params(1.0, 0, 0, 0.5, 1).validate(), InvalidArgument);
  EXPECT_NO_THROW(params(1.0, 0, 0, 0.5, 2).validate());
}
