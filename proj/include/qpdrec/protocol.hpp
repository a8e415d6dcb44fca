#ifndef QPDREC_PROTOCOL_HPP
#define QPDREC_PROTOCOL_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qpdrec/analytic_solution.hpp"
#include "qpdrec/common.hpp"
#include "qpdrec/fock_algebra.hpp"
#include "qpdrec/lindblad_oracle.hpp"
#include "qpdrec/parallel.hpp"
#include "qpdrec/quasiprobability.hpp"

namespace qpdrec {

// Measurement protocol. The atom is sent through the displaced field and
// <sigma_x> is read out at the first time t* where z(t*) = -mu is real and
// negative. There the signal is a rescaled s-parametrized quasiprobability:
//
//   <sigma_x> = ((1-s) pi / 2) sin(2 theta) e^{-Gamma t*} F_literal(alpha, s),
//   s = (mu - 1) / (mu + 1).

struct MeasurementSchedule {
  double t_star = 0.0;
  double mu = 1.0;
  double phi = kPi;
  double s = 0.0;
  double prefactor = 0.0;  // <sigma_x> / F
  QpdConvention convention = QpdConvention::normalized;
};

struct ReconstructionRecord {
  cplx alpha;
  double sigma_x = 0.0;
  double f_hat = 0.0;
  double f_direct = 0.0;
  double abs_error = 0.0;
  bool truncation_warning = false;
};

enum class Engine { analytic, oracle };

inline const char* to_string(Engine e) { return e == Engine::analytic ? "analytic" : "oracle"; }

enum class CrossingVariant { derived, figure_literal };

/// Numerator of tan(phi) with eps = gamma/chi.
///   derived:        eps + e^{-2 gamma t} (sin 2 chi t - eps cos 2 chi t)
///   figure_literal: eps + e^{-2 gamma t} (sin chi t - eps cos chi t)
/// The derived form equals -Im z(t) |eta|^2 / chi^2.
inline double crossing_function(const ModelParams& p, double t, CrossingVariant variant) {
  const double eps = p.field_decay / p.chi;
  const double phase = (variant == CrossingVariant::derived ? 2.0 : 1.0) * p.chi * t;
  return eps + std::exp(-2.0 * p.field_decay * t) * (std::sin(phase) - eps * std::cos(phase));
}

/// ((1-s) pi / 2) sin(2 theta) e^{-Gamma t}, halved in the normalized
/// convention so that it pairs with the doubled quasiprobability prefactor.
inline double protocol_prefactor(const ModelParams& p, double t, double s, QpdConvention conv) {
  const double literal = (1.0 - s) * kPi / 2.0 * std::sin(2.0 * p.theta) * std::exp(-p.atom_decay * t);
  return conv == QpdConvention::normalized ? 0.5 * literal : literal;
}

inline double default_horizon(const ModelParams& p) { return 4.0 * kPi / p.chi; }

/// First t* in (0, horizon] with Im z(t*) = 0 and Re z(t*) < 0. Uniform sign
/// scan with step pi/(50 chi), starting one step in to skip the trivial root
/// at t = 0, then bisection to relative tolerance 1e-12.
inline MeasurementSchedule find_measurement_time(const ModelParams& p, double horizon,
                                                 QpdConvention conv = QpdConvention::normalized) {
  p.validate();
  if (!(horizon > 0.0)) throw InvalidArgument("find_measurement_time: horizon must be > 0");

  auto im_z = [&](double t) { return z_factor(p, t).imag(); };
  const double step = kPi / (50.0 * p.chi);

  auto schedule_at = [&](double t) {
    MeasurementSchedule sched;
    sched.t_star = t;
    sched.mu = std::abs(z_factor(p, t));
    sched.phi = kPi;
    sched.s = (sched.mu - 1.0) / (sched.mu + 1.0);
    sched.prefactor = protocol_prefactor(p, t, sched.s, conv);
    sched.convention = conv;
    return sched;
  };

  double lo = step;
  double f_lo = im_z(lo);
  while (lo < horizon) {
    const double hi = std::min(lo + step, horizon);
    const double f_hi = im_z(hi);
    double root = -1.0;
    if (f_lo == 0.0) {
      root = lo;
    } else if (f_hi == 0.0) {
      root = hi;
    } else if ((f_lo < 0.0) != (f_hi < 0.0)) {
      double a = lo;
      double b = hi;
      double fa = f_lo;
      while (b - a > 1e-12 * b) {
        const double mid = 0.5 * (a + b);
        const double fm = im_z(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      root = 0.5 * (a + b);
    }
    if (root > 0.0 && z_factor(p, root).real() < 0.0) return schedule_at(root);
    lo = hi;
    f_lo = f_hi;
  }
  throw NoCrossing(horizon, "no phi = pi crossing of z(t) within horizon " + std::to_string(horizon) +
                                " (eps = gamma/chi = " + std::to_string(p.field_decay / p.chi) + ")");
}

inline MeasurementSchedule find_measurement_time(const ModelParams& p,
                                                 QpdConvention conv = QpdConvention::normalized) {
  return find_measurement_time(p, default_horizon(p), conv);
}

/// |psi_A(theta)><psi_A(theta)| (x) D^dag(alpha) rho_F(0) D(alpha)
inline JointDensityMatrix prepare_initial(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha) {
  p.validate();
  if (rho_f0.dim() != p.dim) throw InvalidArgument("prepare_initial: field dimension does not match model");
  return product_state(atom::superposition_state(p.theta), displaced_field(rho_f0, alpha));
}

namespace detail {

inline double measure_sigma_x(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha, double t,
                              Engine engine, const IntegratorConfig& cfg) {
  const FieldDensityMatrix prepared = displaced_field(rho_f0, alpha);
  if (engine == Engine::analytic) return sigma_x_trace(evolve_closed_form(p, prepared, t));
  const JointDensityMatrix joint = product_state(atom::superposition_state(p.theta), prepared);
  return sigma_x_trace(evolve_rk4(joint, p, t, cfg).state);
}

inline ReconstructionRecord reconstruct_with(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha,
                                             const MeasurementSchedule& sched, Engine engine,
                                             const IntegratorConfig& cfg, const QpdEvaluation& direct) {
  if (sched.prefactor == 0.0 || !std::isfinite(sched.prefactor))
    throw InvalidArgument("reconstruct: zero signal prefactor (sin 2 theta = 0)");
  ReconstructionRecord rec;
  rec.alpha = alpha;
  rec.sigma_x = measure_sigma_x(p, rho_f0, alpha, sched.t_star, engine, cfg);
  rec.f_hat = rec.sigma_x / sched.prefactor;
  rec.f_direct = direct.value;
  rec.abs_error = std::abs(rec.f_hat - rec.f_direct);
  rec.truncation_warning = direct.displacement_warning || direct.tail_warning;
  return rec;
}

}  // namespace detail

inline ReconstructionRecord reconstruct_point(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha,
                                              const MeasurementSchedule& sched, Engine engine,
                                              const IntegratorConfig& cfg = {}) {
  p.validate();
  if (rho_f0.dim() != p.dim) throw InvalidArgument("reconstruct_point: field dimension does not match model");
  const QpdEvaluation direct = qpd_direct(rho_f0, alpha, sched.s, sched.convention);
  return detail::reconstruct_with(p, rho_f0, alpha, sched, engine, cfg, direct);
}

/// Row-major over the grid (real part outer). Points are independent and may
/// run concurrently; output order is fixed.
inline std::vector<ReconstructionRecord> reconstruct_grid(const ModelParams& p, const FieldDensityMatrix& rho_f0,
                                                          const PhaseGrid& grid, const MeasurementSchedule& sched,
                                                          Engine engine, const IntegratorConfig& cfg = {},
                                                          unsigned threads = 0) {
  p.validate();
  grid.validate();
  if (rho_f0.dim() != p.dim) throw InvalidArgument("reconstruct_grid: field dimension does not match model");
  const QpdEvaluator direct(rho_f0);
  std::vector<ReconstructionRecord> out(static_cast<std::size_t>(grid.size()));
  parallel_for(out.size(), threads, [&](std::size_t flat) {
    const cplx alpha = grid.point(static_cast<Index>(flat));
    try {
      out[flat] = detail::reconstruct_with(p, rho_f0, alpha, sched, engine, cfg,
                                           direct.evaluate(alpha, sched.s, sched.convention));
    } catch (const std::exception& e) {
      throw GridPointError(alpha, "reconstruction failed at alpha = (" + std::to_string(alpha.real()) + ", " +
                                      std::to_string(alpha.imag()) + "): " + e.what());
    }
  });
  return out;
}

struct SmallThetaRecord {
  ReconstructionRecord exact;
  double f_hat_approx = 0.0;
  double relative_gap = 0.0;  // |approx - exact| / |exact|
};

/// Reconstruction with sin(2 theta) replaced by 2 theta in the prefactor.
inline SmallThetaRecord small_theta_estimate(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha,
                                             const MeasurementSchedule& sched, Engine engine,
                                             const IntegratorConfig& cfg = {}) {
  if (!(p.theta > 0.0)) throw InvalidArgument("small_theta_estimate: theta = 0 carries no signal");
  if (p.theta > 0.05) throw InvalidArgument("small_theta_estimate: requires theta <= 0.05");
  SmallThetaRecord out;
  out.exact = reconstruct_point(p, rho_f0, alpha, sched, engine, cfg);
  double approx_prefactor = (1.0 - sched.s) * kPi * p.theta * std::exp(-p.atom_decay * sched.t_star);
  if (sched.convention == QpdConvention::normalized) approx_prefactor *= 0.5;
  out.f_hat_approx = out.exact.sigma_x / approx_prefactor;
  out.relative_gap = std::abs(out.f_hat_approx - out.exact.f_hat) / std::abs(out.exact.f_hat);
  return out;
}

}  // namespace qpdrec

#endif  // QPDREC_PROTOCOL_HPP
