#ifndef QPDREC_ANALYTIC_SOLUTION_HPP
#define QPDREC_ANALYTIC_SOLUTION_HPP

#include <cmath>
#include <vector>

#include "qpdrec/common.hpp"
#include "qpdrec/fock_algebra.hpp"
#include "qpdrec/lindblad_oracle.hpp"

namespace qpdrec {

// Closed-form evolution of the dispersive model with field and atomic decay.
//
// The solution splits as rho(t) = rho_1(t) + rho_2(t). rho_1 carries the
// initial atomic populations and coherences through field damping; rho_2 is
// the population that reached |g> by spontaneous emission. Both are finite
// sums on the truncated space: a^N = 0 ends every jump series at m = N-1, and
// the superoperator function (1 - e^{-(R_F + 2 Gamma) t}) / (R_F + 2 Gamma) is
// diagonal on number-basis matrix units |n><n'|.

struct ZetaCoefficients {
  double c = 0.0;  // int_0^t e^{-2 gamma s} cos(2 chi s) ds
  double s = 0.0;  // int_0^t e^{-2 gamma s} sin(2 chi s) ds
  cplx zeta;       // c + i s
  cplx eta;        // gamma + i chi
};

inline ZetaCoefficients zeta(const ModelParams& p, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("zeta: t must be >= 0");
  const double g = p.field_decay;
  const double chi = p.chi;
  const double den = 4.0 * chi * chi + 4.0 * g * g;
  const double e = std::exp(-2.0 * g * t);
  const double c2 = std::cos(2.0 * chi * t);
  const double s2 = std::sin(2.0 * chi * t);
  ZetaCoefficients out;
  out.c = (-2.0 * g * c2 + 2.0 * chi * s2) / den * e + 2.0 * g / den;
  out.s = (-2.0 * g * s2 - 2.0 * chi * c2) / den * e + 2.0 * chi / den;
  out.zeta = {out.c, out.s};
  out.eta = {g, chi};
  return out;
}

/// z(t) = (gamma + i chi e^{-2 eta t}) / eta; the per-photon weight of the
/// sigma_x signal.
inline cplx z_factor(const ModelParams& p, double t) {
  const cplx eta(p.field_decay, p.chi);
  return (p.field_decay + kI * p.chi * std::exp(-2.0 * eta * t)) / eta;
}

namespace detail {

// (1 - e^{-2 gamma t}) / (2 gamma), with the gamma -> 0 limit t.
inline double damping_weight(const ModelParams& p, double t) {
  if (p.field_decay < 1e-12 * p.chi) return t;
  return -std::expm1(-2.0 * p.field_decay * t) / (2.0 * p.field_decay);
}

// (1 - e^{-lambda t}) / lambda for complex lambda.
inline cplx relaxation_integral(cplx lambda, double t) {
  const cplx x = lambda * t;
  if (std::abs(x) < 1e-6) return t * (1.0 - x / 2.0 + x * x / 6.0);
  return (1.0 - std::exp(-x)) / lambda;
}

// a^m X a^{dag m} for m = 0..N-1, by dense products.
inline std::vector<Matrix> jump_ladder(const Matrix& x) {
  const Index n = x.rows();
  const Matrix a = ladder_ops(n).annihilation.matrix();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(x);
  for (Index m = 1; m < n; ++m) out.push_back(a * out.back() * a.adjoint());
  return out;
}

inline void check_inputs(const ModelParams& p, const FieldDensityMatrix& rho_f, double t, const char* who) {
  p.validate();
  if (rho_f.dim() != p.dim) throw InvalidArgument(std::string(who) + ": field dimension does not match model");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument(std::string(who) + ": t must be >= 0");
}

}  // namespace detail

/// rho_1(t) for an already displaced field D^dag(alpha) rho_F(0) D(alpha).
inline JointDensityMatrix rho1(const ModelParams& p, const FieldDensityMatrix& prepared, double t) {
  detail::check_inputs(p, prepared, t, "rho1");
  const Index n = p.dim;
  const double g = p.field_decay;
  const double sin2 = std::sin(p.theta) * std::sin(p.theta);
  const double half_sin2t = 0.5 * std::sin(2.0 * p.theta);

  const double pop_step = 2.0 * g * detail::damping_weight(p, t);  // 1 - e^{-2 gamma t}
  const cplx coh_step = 2.0 * g * std::conj(zeta(p, t).zeta);      // 2 gamma zeta^*

  const AtomOperator populations(
      (sin2 * atom::sigma_z().matrix() + atom::ground_projector().matrix()).eval());
  const auto ladder = detail::jump_ladder(prepared.matrix());

  Matrix x = Matrix::Zero(2 * n, 2 * n);
  double pop_coef = 1.0;
  cplx coh_coef = 1.0;
  for (Index m = 0; m < n; ++m) {
    if (m > 0) {
      pop_coef *= pop_step / static_cast<double>(m);
      coh_coef *= coh_step / static_cast<double>(m);
    }
    const AtomOperator weight = cplx(pop_coef) * populations +
                                (half_sin2t * coh_coef) * atom::sigma_plus() +
                                (half_sin2t * std::conj(coh_coef)) * atom::sigma_minus();
    const Matrix& jm = ladder[static_cast<std::size_t>(m)];
    for (Index a = 0; a < 2; ++a)
      for (Index b = 0; b < 2; ++b)
        if (weight(a, b) != 0.0) x.block(a * n, b * n, n, n) += weight(a, b) * jm;
  }

  // Left:  e^{-(Gamma s+s- + gamma n + i chi sz n) t}
  // Right: e^{-(Gamma s+s- + gamma n - i chi sz n) t}
  Vector left(2 * n);
  Vector right(2 * n);
  for (Index a = 0; a < 2; ++a) {
    const double sz = (a == kExcited) ? 1.0 : -1.0;
    const double decay = (a == kExcited) ? p.atom_decay : 0.0;
    for (Index k = 0; k < n; ++k) {
      const double kk = static_cast<double>(k);
      left(a * n + k) = std::exp(-cplx(decay + g * kk, p.chi * sz * kk) * t);
      right(a * n + k) = std::exp(-cplx(decay + g * kk, -p.chi * sz * kk) * t);
    }
  }
  x = left.asDiagonal() * x * right.asDiagonal();
  return JointDensityMatrix(std::move(x));
}

/// rho_2(t): the spontaneously emitted population, supported on |g><g|.
inline JointDensityMatrix rho2(const ModelParams& p, const FieldDensityMatrix& prepared, double t) {
  detail::check_inputs(p, prepared, t, "rho2");
  const Index n = p.dim;
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  const double amplitude = 2.0 * p.atom_decay * std::sin(p.theta) * std::sin(p.theta);
  if (amplitude == 0.0) return JointDensityMatrix(std::move(out));

  const double g = p.field_decay;
  const double step = 2.0 * g * detail::damping_weight(p, t);  // 1 - e^{-2 gamma t}
  const auto ladder = detail::jump_ladder(prepared.matrix());
  Matrix damped = Matrix::Zero(n, n);
  double coef = 1.0;
  for (Index m = 0; m < n; ++m) {
    if (m > 0) coef *= step / static_cast<double>(m);
    damped += coef * ladder[static_cast<std::size_t>(m)];
  }

  Matrix gg(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double di = static_cast<double>(i);
      const double dj = static_cast<double>(j);
      const cplx lambda(2.0 * p.atom_decay, 2.0 * p.chi * (di - dj));
      const cplx outer = std::exp(cplx(-g * di, p.chi * di) * t) * std::exp(cplx(-g * dj, -p.chi * dj) * t);
      gg(i, j) = amplitude * outer * detail::relaxation_integral(lambda, t) * damped(i, j);
    }
  }
  out.block(kGround * n, kGround * n, n, n) = gg;
  return JointDensityMatrix(std::move(out));
}

/// rho_1 + rho_2.
inline JointDensityMatrix evolve_closed_form(const ModelParams& p, const FieldDensityMatrix& prepared, double t) {
  return rho1(p, prepared, t) + rho2(p, prepared, t);
}

/// rho_2 from the binomial triple series, truncated at l <= l_max:
///   2 Gamma sin^2(theta) sum_l t^{l+1}/(l+1)! (-1)^l sum_k C(l,k) (2 Gamma)^{l-k}
///   sum_m (1 - e^{-2 gamma t})^m / m! (2 i chi)^k sum_j (-1)^j C(k,j)
///   e^{(i chi - gamma) n t} n^{k-j} a^m rho a^{dag m} n^j e^{(-i chi - gamma) n t}
/// The powers n^{k-j} act on the left and n^j on the right. Only
/// suitable for small dimensions: the j-sum cancels catastrophically.
inline JointDensityMatrix rho2_series(const ModelParams& p, const FieldDensityMatrix& prepared, double t,
                                      int l_max) {
  detail::check_inputs(p, prepared, t, "rho2_series");
  const Index n = p.dim;
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  const double amplitude = 2.0 * p.atom_decay * std::sin(p.theta) * std::sin(p.theta);

  const double step = -std::expm1(-2.0 * p.field_decay * t);
  const auto ladder = detail::jump_ladder(prepared.matrix());
  Matrix damped = Matrix::Zero(n, n);
  double coef = 1.0;
  for (Index m = 0; m < n; ++m) {
    if (m > 0) coef *= step / static_cast<double>(m);
    damped += coef * ladder[static_cast<std::size_t>(m)];
  }

  auto binom = [](int a, int b) {
    double r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * static_cast<double>(a - b + i) / static_cast<double>(i);
    return r;
  };
  const Matrix num = ladder_ops(n).number.matrix();
  std::vector<Matrix> num_pow(static_cast<std::size_t>(l_max) + 1);
  num_pow[0] = Matrix::Identity(n, n);
  for (int k = 1; k <= l_max; ++k) num_pow[static_cast<std::size_t>(k)] = num_pow[static_cast<std::size_t>(k) - 1] * num;

  // R_F^k applied to the damped field, k = 0..l_max.
  std::vector<Matrix> rk(static_cast<std::size_t>(l_max) + 1);
  for (int k = 0; k <= l_max; ++k) {
    Matrix acc = Matrix::Zero(n, n);
    for (int j = 0; j <= k; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      acc += sign * binom(k, j) * num_pow[static_cast<std::size_t>(k - j)] * damped * num_pow[static_cast<std::size_t>(j)];
    }
    rk[static_cast<std::size_t>(k)] = std::pow(cplx(0.0, 2.0 * p.chi), k) * acc;
  }

  Matrix series = Matrix::Zero(n, n);
  double t_pow = t;  // t^{l+1}/(l+1)!
  for (int l = 0; l <= l_max; ++l) {
    if (l > 0) t_pow *= t / static_cast<double>(l + 1);
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    for (int k = 0; k <= l; ++k)
      series += sign * t_pow * binom(l, k) * std::pow(2.0 * p.atom_decay, l - k) * rk[static_cast<std::size_t>(k)];
  }

  Vector left(n);
  Vector right(n);
  for (Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    left(k) = std::exp(cplx(-p.field_decay * kk, p.chi * kk) * t);
    right(k) = std::exp(cplx(-p.field_decay * kk, -p.chi * kk) * t);
  }
  out.block(kGround * n, kGround * n, n, n) = amplitude * (left.asDiagonal() * series * right.asDiagonal());
  // The truncated series is Hermitian only up to its truncation error.
  Matrix sym = 0.5 * (out + out.adjoint());
  return JointDensityMatrix(std::move(sym));
}

/// Special case without atomic decay and with an equal-weight atom
/// (Gamma = 0, theta = pi/4), written block by block with the jump terms
/// expanded entrywise:
///   <i| a^m X a^{dag m} |j> = sqrt((i+m)!/i! (j+m)!/j!) X(i+m, j+m).
inline JointDensityMatrix rho_without_atomic_decay(const ModelParams& p, const FieldDensityMatrix& prepared,
                                                   double t) {
  detail::check_inputs(p, prepared, t, "rho_without_atomic_decay");
  if (p.atom_decay != 0.0 || std::abs(p.theta - kPi / 4.0) > 1e-15)
    throw InvalidArgument("rho_without_atomic_decay: requires Gamma = 0 and theta = pi/4");

  const Index n = p.dim;
  const double g = p.field_decay;
  const double pop_step = -std::expm1(-2.0 * g * t);
  const cplx eta(g, p.chi);
  const cplx coh_step = g / eta * (1.0 - std::exp(-2.0 * eta * t));
  const Matrix& x = prepared.matrix();

  Matrix pop = Matrix::Zero(n, n);
  Matrix coh = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      double pc = 1.0;
      cplx cc = 1.0;
      double root = 1.0;  // sqrt((i+m)!/i! (j+m)!/j!)
      for (Index m = 0; i + m < n && j + m < n; ++m) {
        if (m > 0) {
          pc *= pop_step / static_cast<double>(m);
          cc *= coh_step / static_cast<double>(m);
          root *= std::sqrt(static_cast<double>((i + m) * (j + m)));
        }
        pop(i, j) += pc * root * x(i + m, j + m);
        coh(i, j) += cc * root * x(i + m, j + m);
      }
    }
  }

  Matrix out(2 * n, 2 * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double di = static_cast<double>(i);
      const double dj = static_cast<double>(j);
      const cplx ee = std::exp(-cplx(g * (di + dj), p.chi * (di - dj)) * t);
      const cplx eg = std::exp(-eta * (di + dj) * t);
      out(kExcited * n + i, kExcited * n + j) = 0.5 * ee * pop(i, j);
      out(kGround * n + i, kGround * n + j) = 0.5 * std::conj(ee) * pop(i, j);
      out(kExcited * n + i, kGround * n + j) = 0.5 * eg * coh(i, j);
    }
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      out(kGround * n + i, kExcited * n + j) = std::conj(out(kExcited * n + j, kGround * n + i));
  return JointDensityMatrix(std::move(out));
}

/// <sigma_x>(t) = (1/4) sin(2 theta) e^{-Gamma t} sum_k z^k <k|D^dag rho D|k> + c.c.
/// for an un-displaced initial field rho_F(0).
inline double sigma_x_closed(const ModelParams& p, const FieldDensityMatrix& rho_f0, cplx alpha, double t) {
  detail::check_inputs(p, rho_f0, t, "sigma_x_closed");
  const FockOperator d = displacement(alpha, p.dim);
  const Matrix prepared = d.matrix().adjoint() * rho_f0.matrix() * d.matrix();
  const cplx z = z_factor(p, t);
  cplx sum = 0.0;
  cplx zk = 1.0;
  for (Index k = 0; k < p.dim; ++k) {
    sum += zk * prepared(k, k);
    zk *= z;
  }
  return 0.5 * std::sin(2.0 * p.theta) * std::exp(-p.atom_decay * t) * sum.real();
}

}  // namespace qpdrec

#endif  // QPDREC_ANALYTIC_SOLUTION_HPP
