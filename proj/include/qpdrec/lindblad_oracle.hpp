#ifndef QPDREC_LINDBLAD_ORACLE_HPP
#define QPDREC_LINDBLAD_ORACLE_HPP

#include <cmath>
#include <functional>
#include <string>

#include "qpdrec/common.hpp"
#include "qpdrec/fock_algebra.hpp"

namespace qpdrec {

/// Physical parameters of the dispersive atom-field model.
struct ModelParams {
  double chi = 1.0;          // dispersive coupling, rad/time
  double field_decay = 0.0;  // gamma, 1/time
  double atom_decay = 0.0;   // Gamma, 1/time
  double theta = kPi / 4.0;  // atomic superposition angle
  Index dim = 16;            // Fock truncation N

  void validate() const {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw InvalidArgument("ModelParams: chi must be > 0");
    if (!(field_decay >= 0.0) || !std::isfinite(field_decay))
      throw InvalidArgument("ModelParams: field decay must be >= 0");
    if (!(atom_decay >= 0.0) || !std::isfinite(atom_decay))
      throw InvalidArgument("ModelParams: atomic decay must be >= 0");
    if (!(theta >= 0.0 && theta <= kPi / 2.0))
      throw InvalidArgument("ModelParams: theta must lie in [0, pi/2]");
    if (dim < 2 || dim > 256) throw InvalidArgument("ModelParams: dim must lie in [2, 256]");
  }
};

struct IntegratorConfig {
  double dt = 1e-3;
  bool renormalize = false;
  double drift_tolerance = 1e-6;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("IntegratorConfig: dt must be > 0");
    if (!(drift_tolerance > 0.0)) throw InvalidArgument("IntegratorConfig: drift_tolerance must be > 0");
  }
};

/// Right-hand side of the master equation
///   -i chi [n sz, rho] + 2 gamma a rho a^dag - gamma (n rho + rho n)
///   + 2 Gamma s- rho s+ - Gamma (s+s- rho + rho s+s-)
/// evaluated entrywise in the atom-major product basis. Every operator in the
/// model is diagonal or a single shifted diagonal there, so each term is a
/// scaling or a shifted copy of rho.
inline Matrix liouvillian_apply(const Matrix& rho, const ModelParams& p) {
  const Index n = rho.rows() / 2;
  if (rho.rows() != rho.cols() || rho.rows() != 2 * p.dim)
    throw InvalidArgument("liouvillian_apply: state dimension does not match model");

  const double chi = p.chi;
  const double g = p.field_decay;
  const double big_g = p.atom_decay;
  Matrix out(2 * n, 2 * n);

  for (Index b = 0; b < 2; ++b) {
    const double sb = (b == kExcited) ? 1.0 : -1.0;
    const double db = (b == kExcited) ? big_g : 0.0;
    for (Index a = 0; a < 2; ++a) {
      const double sa = (a == kExcited) ? 1.0 : -1.0;
      const double da = (a == kExcited) ? big_g : 0.0;
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
          const cplx r = rho(a * n + i, b * n + j);
          const double hi = sa * static_cast<double>(i);
          const double hj = sb * static_cast<double>(j);
          cplx v = cplx(0.0, -chi * (hi - hj)) * r;
          v -= (g * static_cast<double>(i + j) + da + db) * r;
          if (i + 1 < n && j + 1 < n)
            v += 2.0 * g * std::sqrt(static_cast<double>((i + 1) * (j + 1))) *
                 rho(a * n + i + 1, b * n + j + 1);
          if (a == kGround && b == kGround)
            v += 2.0 * big_g * rho(kExcited * n + i, kExcited * n + j);
          out(a * n + i, b * n + j) = v;
        }
      }
    }
  }
  return out;
}

/// Reference Liouvillian built from dense joint-space operator products.
/// Slow; kept to cross-check `liouvillian_apply`.
inline Matrix liouvillian_apply_dense(const Matrix& rho, const ModelParams& p) {
  const auto ops = ladder_ops(p.dim);
  const Matrix h = tensor_atom_field(atom::sigma_z(), ops.number).matrix();
  const Matrix a = tensor_atom_field(atom::identity(), ops.annihilation).matrix();
  const Matrix num = tensor_atom_field(atom::identity(), ops.number).matrix();
  const FockOperator id(Matrix::Identity(p.dim, p.dim));
  const Matrix sm = tensor_atom_field(atom::sigma_minus(), id).matrix();
  const Matrix spsm = tensor_atom_field(atom::excited_projector(), id).matrix();

  return -kI * p.chi * (h * rho - rho * h) +
         2.0 * p.field_decay * a * rho * a.adjoint() - p.field_decay * (num * rho + rho * num) +
         2.0 * p.atom_decay * sm * rho * sm.adjoint() - p.atom_decay * (spsm * rho + rho * spsm);
}

struct EvolutionResult {
  JointDensityMatrix state;
  double trace_drift = 0.0;           // max |Tr rho - Tr rho0| seen along the run
  double max_hermiticity_drift = 0.0; // before the final symmetrization
  long steps = 0;
};

/// Called after every step with the time and the raw (unsymmetrized) state.
using StepObserver = std::function<void(double, const Matrix&)>;

/// Fixed-step classic RK4. The last step is shortened to land on t_final.
/// The state is symmetrized as (rho + rho^dag)/2 once, at the end.
inline EvolutionResult evolve_rk4(const JointDensityMatrix& rho0, const ModelParams& p, double t_final,
                                  const IntegratorConfig& cfg, const StepObserver& observer = {}) {
  p.validate();
  cfg.validate();
  if (rho0.field_dim() != p.dim) throw InvalidArgument("evolve_rk4: state dimension does not match model");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw InvalidArgument("evolve_rk4: t_final must be >= 0");
  if (t_final == 0.0) return {rho0, 0.0, 0.0, 0};
  if (cfg.dt > t_final) throw InvalidArgument("evolve_rk4: dt exceeds t_final");

  const long steps = static_cast<long>(std::ceil(t_final / cfg.dt - 1e-9));
  const double trace0 = rho0.trace().real();
  Matrix rho = rho0.matrix();
  double drift = 0.0;
  double herm = 0.0;
  double t = 0.0;

  for (long k = 0; k < steps; ++k) {
    const double h = (k + 1 == steps) ? t_final - cfg.dt * static_cast<double>(steps - 1) : cfg.dt;
    const Matrix k1 = liouvillian_apply(rho, p);
    const Matrix k2 = liouvillian_apply(rho + (0.5 * h) * k1, p);
    const Matrix k3 = liouvillian_apply(rho + (0.5 * h) * k2, p);
    const Matrix k4 = liouvillian_apply(rho + h * k3, p);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = (k + 1 == steps) ? t_final : t + h;

    if (!all_finite(rho))
      throw IntegrationError("evolve_rk4: state became non-finite at t = " + std::to_string(t));
    const double tr = rho.trace().real();
    drift = std::max(drift, std::abs(tr - trace0));
    if (std::abs(tr - trace0) > cfg.drift_tolerance)
      throw IntegrationError("evolve_rk4: trace drift " + std::to_string(std::abs(tr - trace0)) +
                             " exceeds tolerance at t = " + std::to_string(t) +
                             " (dt too large or truncation too small)");
    if (cfg.renormalize) rho *= trace0 / tr;
    if (observer) {
      herm = std::max(herm, hermiticity_error(rho));
      observer(t, rho);
    }
  }
  if (!observer) herm = hermiticity_error(rho);

  Matrix sym = 0.5 * (rho + rho.adjoint());
  return {JointDensityMatrix(std::move(sym)), drift, herm, steps};
}

/// Tr(rho sigma_x (x) I) with the halved sigma_x; equals Re Tr(rho_eg).
inline double sigma_x_trace(const JointDensityMatrix& rho) {
  const Index n = rho.field_dim();
  const Matrix& m = rho.matrix();
  cplx acc = 0.0;
  for (Index k = 0; k < n; ++k)
    acc += 0.5 * (m(kExcited * n + k, kGround * n + k) + m(kGround * n + k, kExcited * n + k));
  return acc.real();
}

}  // namespace qpdrec

#endif  // QPDREC_LINDBLAD_ORACLE_HPP
