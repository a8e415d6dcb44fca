#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qpdrec/protocol.hpp"

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

// Trigonometric forms of |z| and of the numerator and denominator of tan(phi)
// with phase 2 chi t, written out from the definition of z.
double mu_trig(double eps, double g, double chi, double t) {
  const double e = std::exp(-2.0 * g * t);
  return std::sqrt((eps * eps + e * e + 2.0 * eps * std::sin(2.0 * chi * t) * e) / (1.0 + eps * eps));
}
double tan_num(double eps, double g, double chi, double t) {
  return eps + std::exp(-2.0 * g * t) * (std::sin(2.0 * chi * t) - eps * std::cos(2.0 * chi * t));
}
double tan_den(double eps, double g, double chi, double t) {
  return eps * eps + std::exp(-2.0 * g * t) * (std::cos(2.0 * chi * t) + eps * std::sin(2.0 * chi * t));
}

// First root of tan_num after t = 0 with a negative denominator, by a fine
// scan plus bisection; independent of the library root finder.
double first_crossing(double g, double chi) {
  const double eps = g / chi;
  const double h = 1e-3 / chi;
  for (double a = h; a < 4.0 * kPi / chi; a += h) {
    const double b = a + h;
    double fa = tan_num(eps, g, chi, a);
    if ((fa < 0.0) == (tan_num(eps, g, chi, b) < 0.0)) continue;
    double lo = a, hi = b;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = tan_num(eps, g, chi, mid);
      if ((fm < 0.0) == (fa < 0.0)) {
        lo = mid;
        fa = fm;
      } else {
        hi = mid;
      }
    }
    const double r = 0.5 * (lo + hi);
    if (tan_den(eps, g, chi, r) < 0.0) return r;
  }
  return -1.0;
}

}  // namespace

TEST(Schedule, ModulusAndPhaseMatchTrigonometricForms) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double chi = 0.3 + 2.0 * u(rng);
    const double g = 0.5 * u(rng);
    const double t = 6.0 * u(rng);
    const double eps = g / chi;
    const ModelParams p = params(chi, g, 0.0, 0.5, 4);
    const cplx z = z_factor(p, t);
    EXPECT_NEAR(std::abs(z), mu_trig(eps, g, chi, t), 1e-12);
    // z |eta|^2 / chi^2 = tan_den - i tan_num
    const double scale = std::norm(cplx(g, chi)) / (chi * chi);
    EXPECT_NEAR(z.real() * scale, tan_den(eps, g, chi, t), 1e-12);
    EXPECT_NEAR(-z.imag() * scale, tan_num(eps, g, chi, t), 1e-12);
    EXPECT_NEAR(crossing_function(p, t, CrossingVariant::derived), tan_num(eps, g, chi, t), 1e-12);
  }
}

TEST(Schedule, FigureVariantUsesSingleAngle) {
  const ModelParams p = params(1.0, 0.05, 0.0, 0.5, 4);
  for (double t : {0.0, 0.7, 3.3})
    EXPECT_NEAR(crossing_function(p, t, CrossingVariant::figure_literal),
                0.05 + std::exp(-0.1 * t) * (std::sin(t) - 0.05 * std::cos(t)), 1e-15);
}

TEST(Schedule, IdealCavityGivesWignerTime) {
  for (double chi : {0.5, 1.0, 3.0}) {
    const MeasurementSchedule s = find_measurement_time(params(chi, 0.0, 0.0, 0.5, 4));
    EXPECT_NEAR(s.t_star, kPi / (2.0 * chi), 1e-10);
    EXPECT_NEAR(s.mu, 1.0, 1e-12);
    EXPECT_NEAR(s.s, 0.0, 1e-12);
    EXPECT_EQ(s.phi, kPi);
  }
}

TEST(Schedule, AgreesWithIndependentRootFinder) {
  for (double g : {0.01, 0.05, 0.1, 0.2})
    for (double chi : {1.0, 2.0, 3.0}) {
      const ModelParams p = params(chi, g, 0.0, 0.5, 4);
      const MeasurementSchedule s = find_measurement_time(p);
      const double ref = first_crossing(g, chi);
      ASSERT_GT(ref, 0.0);
      EXPECT_NEAR(s.t_star, ref, 1e-10 * ref);
      EXPECT_NEAR(s.mu, mu_trig(g / chi, g, chi, ref), 1e-9);
      EXPECT_NEAR(s.s, (s.mu - 1.0) / (s.mu + 1.0), 1e-15);
      const cplx z = z_factor(p, s.t_star);
      EXPECT_LE(std::abs(z.imag()), 1e-10);
      EXPECT_LT(z.real(), 0.0);
      EXPECT_GT(s.mu, 0.0);
      EXPECT_LE(s.mu, 1.0);
      EXPECT_GT(s.s, -1.0);
      EXPECT_LE(s.s, 0.0);
    }
}

TEST(Schedule, CrossingExistsExactlyWhenIndependentScanFindsOne) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  for (int trial = 0; trial < 40; ++trial) {
    const double g = u(rng);
    const double ref = first_crossing(g, 1.0);
    const ModelParams p = params(1.0, g, 0.0, 0.5, 4);
    if (ref > 0.0) {
      EXPECT_NEAR(find_measurement_time(p).t_star, ref, 1e-9) << "gamma = " << g;
    } else {
      EXPECT_THROW(find_measurement_time(p), NoCrossing) << "gamma = " << g;
    }
  }
}

TEST(Schedule, DefaultScenarioBracket) {
  const MeasurementSchedule s = find_measurement_time(params(1.0, 0.05, 0.1, kPi / 5.0, 32));
  EXPECT_GT(s.t_star, kPi / 2.0);
  EXPECT_LT(s.t_star, 3.0 * kPi / 4.0);
  EXPECT_NEAR(s.t_star, first_crossing(0.05, 1.0), 1e-9);
}

TEST(Schedule, MonotoneLossWithFieldDecay) {
  double prev_mu = 2.0;
  double prev_s = 1.0;
  for (double g : {0.01, 0.05, 0.1, 0.2}) {
    const MeasurementSchedule s = find_measurement_time(params(1.0, g, 0.0, 0.5, 4));
    EXPECT_LE(s.mu, prev_mu);
    EXPECT_LE(s.s, prev_s);
    prev_mu = s.mu;
    prev_s = s.s;
  }
}

TEST(Schedule, StrongDecayHasNoCrossing) {
  const ModelParams p = params(1.0, 5.0, 0.0, 0.5, 4);
  try {
    find_measurement_time(p);
    FAIL() << "expected NoCrossing";
  } catch (const NoCrossing& e) {
    EXPECT_NEAR(e.horizon(), default_horizon(p), 1e-15);
  }
  EXPECT_THROW(find_measurement_time(params(1.0, 0.05, 0.0, 0.5, 4), 1.0), NoCrossing);
  EXPECT_THROW(find_measurement_time(params(1.0, 0.05, 0.0, 0.5, 4), -1.0), InvalidArgument);
}

TEST(Schedule, PrefactorConventions) {
  const ModelParams p = params(1.0, 0.05, 0.1, kPi / 5.0, 8);
  const MeasurementSchedule lit = find_measurement_time(p, QpdConvention::paper_literal);
  const MeasurementSchedule nrm = find_measurement_time(p, QpdConvention::normalized);
  const double expected = (1.0 - lit.s) * kPi / 2.0 * std::sin(2.0 * p.theta) * std::exp(-p.atom_decay * lit.t_star);
  EXPECT_NEAR(lit.prefactor, expected, 1e-15);
  EXPECT_NEAR(nrm.prefactor, 0.5 * expected, 1e-15);
}

TEST(PrepareInitial, ProductOfAtomAndDisplacedField) {
  const ModelParams p = params(1.0, 0.05, 0.1, 0.4, 12);
  const FieldDensityMatrix f = coherent_state({0.3, 0.2}, p.dim);
  const JointDensityMatrix rho = prepare_initial(p, f, {0.3, 0.2});
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  // D^dag(beta) |beta> is the vacuum.
  EXPECT_NEAR(rho.block(kGround, kGround)(0, 0).real(), std::pow(std::cos(p.theta), 2), 1e-10);
  EXPECT_NEAR(sigma_x_trace(rho), 0.5 * std::sin(2.0 * p.theta), 1e-12);
  EXPECT_THROW(prepare_initial(p, fock_state(0, 6), 0.0), InvalidArgument);
}

TEST(Reconstruct, IdentityHoldsInBothConventions) {
  const ModelParams p = params(1.0, 0.05, 0.1, kPi / 5.0, 24);
  const FieldDensityMatrix f = coherent_state({0.5, 0.3}, p.dim);
  const PhaseGrid grid{-1.0, 1.0, -1.0, 1.0, 5, 5};
  for (QpdConvention conv : {QpdConvention::normalized, QpdConvention::paper_literal}) {
    const MeasurementSchedule sched = find_measurement_time(p, conv);
    for (const auto& r : reconstruct_grid(p, f, grid, sched, Engine::analytic)) {
      EXPECT_LE(r.abs_error, 1e-5);
      EXPECT_FALSE(r.truncation_warning);
      // The measured signal is the closed-form trace.
      EXPECT_NEAR(r.sigma_x, sigma_x_closed(p, f, r.alpha, sched.t_star), 1e-12);
    }
  }
}

TEST(Reconstruct, OracleEngineAgrees) {
  const ModelParams p = params(1.0, 0.05, 0.1, kPi / 5.0, 12);
  const FieldDensityMatrix f = coherent_state({0.2, -0.3}, p.dim);
  const MeasurementSchedule sched = find_measurement_time(p);
  const PhaseGrid grid{-0.5, 0.5, -0.5, 0.5, 3, 3};
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  for (const auto& r : reconstruct_grid(p, f, grid, sched, Engine::oracle, cfg)) EXPECT_LE(r.abs_error, 1e-3);
}

TEST(Reconstruct, PointAndGridAgreeAndAreThreadIndependent) {
  const ModelParams p = params(1.0, 0.1, 0.2, 0.6, 16);
  const FieldDensityMatrix f = thermal_state(0.3, p.dim);
  const MeasurementSchedule sched = find_measurement_time(p);
  const PhaseGrid grid{-0.8, 0.8, -0.4, 0.4, 3, 4};
  const auto a = reconstruct_grid(p, f, grid, sched, Engine::analytic, {}, 1);
  const auto b = reconstruct_grid(p, f, grid, sched, Engine::analytic, {}, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].alpha, grid.point(static_cast<Index>(k)));
    EXPECT_EQ(a[k].f_hat, b[k].f_hat);
    EXPECT_EQ(a[k].f_direct, b[k].f_direct);
    const ReconstructionRecord single = reconstruct_point(p, f, a[k].alpha, sched, Engine::analytic);
    EXPECT_NEAR(single.f_hat, a[k].f_hat, 1e-14);
    EXPECT_NEAR(single.f_direct, a[k].f_direct, 1e-10);
  }
}

TEST(Reconstruct, CoherentPeakAtNearestGridPoint) {
  const ModelParams p = params(1.0, 0.05, 0.1, kPi / 5.0, 24);
  const cplx beta(0.5, 0.3);
  const FieldDensityMatrix f = coherent_state(beta, p.dim);
  const PhaseGrid grid{-1.5, 1.5, -1.5, 1.5, 9, 9};
  const auto recs = reconstruct_grid(p, f, grid, find_measurement_time(p), Engine::analytic);
  std::size_t best = 0;
  std::size_t nearest = 0;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    if (recs[k].f_hat > recs[best].f_hat) best = k;
    if (std::abs(recs[k].alpha - beta) < std::abs(recs[nearest].alpha - beta)) nearest = k;
  }
  EXPECT_EQ(best, nearest);
}

TEST(Reconstruct, AtomicDecayCancels) {
  const FieldDensityMatrix f = coherent_state({0.5, 0.3}, 20);
  const cplx alpha(0.25, -0.5);
  std::vector<double> f_hat, sx;
  for (double big_g : {0.0, 0.1, 0.5}) {
    const ModelParams p = params(1.0, 0.05, big_g, kPi / 5.0, 20);
    const ReconstructionRecord r = reconstruct_point(p, f, alpha, find_measurement_time(p), Engine::analytic);
    f_hat.push_back(r.f_hat);
    sx.push_back(r.sigma_x);
  }
  EXPECT_NEAR(f_hat[1], f_hat[0], 1e-6);
  EXPECT_NEAR(f_hat[2], f_hat[0], 1e-6);
  EXPECT_GT(std::abs(sx[2] - sx[0]), 1e-3);
}

TEST(Reconstruct, ZeroSignalRejected) {
  const ModelParams p = params(1.0, 0.05, 0.1, 0.0, 8);
  EXPECT_THROW(reconstruct_point(p, fock_state(0, 8), 0.0, find_measurement_time(p), Engine::analytic),
               InvalidArgument);
}

TEST(SmallTheta, GapIsTheSincFactor) {
  const FieldDensityMatrix f = coherent_state({0.5, 0.3}, 20);
  for (double theta : {0.01, 0.05}) {
    const ModelParams p = params(1.0, 0.05, 0.1, theta, 20);
    const SmallThetaRecord r = small_theta_estimate(p, f, {0.2, 0.1}, find_measurement_time(p), Engine::analytic);
    EXPECT_NEAR(r.relative_gap, 1.0 - std::sin(2.0 * theta) / (2.0 * theta), 1e-9);
  }
  const ModelParams p = params(1.0, 0.05, 0.1, 0.01, 20);
  const SmallThetaRecord r = small_theta_estimate(p, f, {0.2, 0.1}, find_measurement_time(p), Engine::analytic);
  EXPECT_LE(r.relative_gap, 1e-4);
}

TEST(SmallTheta, RejectsOutOfRange) {
  const FieldDensityMatrix f = fock_state(0, 8);
  const ModelParams zero = params(1.0, 0.05, 0.1, 0.0, 8);
  const ModelParams wide = params(1.0, 0.05, 0.1, 0.3, 8);
  const MeasurementSchedule sched = find_measurement_time(zero);
  EXPECT_THROW(small_theta_estimate(zero, f, 0.0, sched, Engine::analytic), InvalidArgument);
  EXPECT_THROW(small_theta_estimate(wide, f, 0.0, sched, Engine::analytic), InvalidArgument);
}
