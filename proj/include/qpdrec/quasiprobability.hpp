#ifndef QPDREC_QUASIPROBABILITY_HPP
#define QPDREC_QUASIPROBABILITY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "qpdrec/common.hpp"
#include "qpdrec/fock_algebra.hpp"
#include "qpdrec/jacobi.hpp"
#include "qpdrec/parallel.hpp"

namespace qpdrec {

// s-parametrized quasiprobabilities from displaced number states:
//
//   F(alpha, s) = c(s) sum_k ((s+1)/(s-1))^k <k| D^dag(alpha) rho D(alpha) |k>
//
// with c(s) = 1/(pi (1-s)) in the paper_literal convention and
// c(s) = 2/(pi (1-s)) in the normalized one. Only the normalized form
// integrates to one over phase space; the literal prefactor integrates to 1/2.

enum class QpdConvention { paper_literal, normalized };

inline const char* to_string(QpdConvention c) {
  return c == QpdConvention::paper_literal ? "paper" : "normalized";
}

inline double qpd_prefactor(QpdConvention conv, double s) {
  const double base = 1.0 / (kPi * (1.0 - s));
  return conv == QpdConvention::normalized ? 2.0 * base : base;
}

struct QpdEvaluation {
  double value = 0.0;
  double tail_fraction = 0.0;         // |last three terms| / sum |terms|
  bool tail_warning = false;          // tail_fraction > 1e-8
  bool displacement_warning = false;  // |alpha|^2 > N/4
};

/// Series over displaced populations p_k = <k|D^dag rho D|k>.
inline QpdEvaluation qpd_series(const RealVector& populations, double s, QpdConvention conv) {
  if (!(s < 1.0)) throw InvalidArgument("qpd: s must be < 1 (s = 1 is singular)");
  const double ratio = (s + 1.0) / (s - 1.0);
  const Index n = populations.size();
  double sum = 0.0;
  double abs_sum = 0.0;
  double tail = 0.0;
  double rk = 1.0;
  for (Index k = 0; k < n; ++k) {
    const double term = rk * populations(k);
    sum += term;
    abs_sum += std::abs(term);
    if (k >= n - 3) tail += std::abs(term);
    rk *= ratio;
  }
  QpdEvaluation out;
  out.value = qpd_prefactor(conv, s) * sum;
  out.tail_fraction = abs_sum > 0.0 ? tail / abs_sum : 0.0;
  out.tail_warning = out.tail_fraction > 1e-8;
  return out;
}

/// Direct evaluation with a dense displacement operator.
inline QpdEvaluation qpd_direct(const FieldDensityMatrix& rho, cplx alpha, double s,
                                QpdConvention conv = QpdConvention::normalized) {
  if (!(s < 1.0)) throw InvalidArgument("qpd_direct: s must be < 1 (s = 1 is singular)");
  const FockOperator d = displacement(alpha, rho.dim());
  const Matrix shifted = d.matrix().adjoint() * rho.matrix() * d.matrix();
  const Vector diag = shifted.diagonal();
  if (diag.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw InvalidArgument("qpd_direct: displaced populations are not real");
  QpdEvaluation out = qpd_series(diag.real(), s, conv);
  out.displacement_warning = displacement_exceeds_guideline(alpha, rho.dim());
  return out;
}

/// Wigner function as (2/pi) Tr(rho D(alpha) P D^dag(alpha)), P = (-1)^n.
/// Builds the displaced parity operator explicitly; an independent route to
/// qpd_direct(s = 0, normalized).
inline double wigner_parity(const FieldDensityMatrix& rho, cplx alpha) {
  const Index n = rho.dim();
  const Matrix d = displacement(alpha, n).matrix();
  Vector parity(n);
  for (Index k = 0; k < n; ++k) parity(k) = (k % 2 == 0) ? 1.0 : -1.0;
  const Matrix displaced_parity = d * parity.asDiagonal() * d.adjoint();
  const cplx tr = (rho.matrix().transpose().cwiseProduct(displaced_parity)).sum();
  return 2.0 / kPi * tr.real();
}

/// Fast repeated evaluation for one state. Diagonalizes rho once and
/// displaces its eigenvectors with a DisplacementFamily, so each phase-space
/// point costs O(rank * N^2). Eigenvalues below 1e-15 Tr(rho) are dropped.
class QpdEvaluator {
 public:
  explicit QpdEvaluator(const FieldDensityMatrix& rho) : family_(rho.dim()) {
    const auto eig = hermitian_eigen(rho.matrix());
    const double cutoff = 1e-15 * rho.trace();
    for (Index i = 0; i < eig.values.size(); ++i) {
      if (std::abs(eig.values(i)) > cutoff) {
        weights_.push_back(eig.values(i));
        vectors_.push_back(eig.vectors.col(i));
      }
    }
  }

  Index dim() const noexcept { return family_.dim(); }

  /// <k| D^dag(alpha) rho D(alpha) |k> for k < N.
  RealVector populations(cplx alpha) const {
    RealVector pops = RealVector::Zero(dim());
    for (std::size_t j = 0; j < weights_.size(); ++j)
      pops += weights_[j] * family_.apply_adjoint(alpha, vectors_[j]).cwiseAbs2();
    return pops;
  }

  QpdEvaluation evaluate(cplx alpha, double s, QpdConvention conv) const {
    QpdEvaluation out = qpd_series(populations(alpha), s, conv);
    out.displacement_warning = displacement_exceeds_guideline(alpha, dim());
    return out;
  }

 private:
  DisplacementFamily family_;
  std::vector<double> weights_;
  std::vector<Vector> vectors_;
};

/// Uniform rectangular grid of phase-space points alpha = re + i im.
struct PhaseGrid {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  Index n_re = 2;
  Index n_im = 2;

  void validate() const {
    if (!(re_min < re_max) || !(im_min < im_max)) throw InvalidArgument("PhaseGrid: bounds must be ordered");
    if (n_re < 2 || n_im < 2) throw InvalidArgument("PhaseGrid: counts must be >= 2");
  }

  double d_re() const { return (re_max - re_min) / static_cast<double>(n_re - 1); }
  double d_im() const { return (im_max - im_min) / static_cast<double>(n_im - 1); }
  Index size() const { return n_re * n_im; }

  cplx point(Index i_re, Index i_im) const {
    return {re_min + d_re() * static_cast<double>(i_re), im_min + d_im() * static_cast<double>(i_im)};
  }

  /// Row-major flat index: real part outer, imaginary part inner.
  cplx point(Index flat) const { return point(flat / n_im, flat % n_im); }
};

/// F(alpha, s) over the grid; values(i_re, i_im).
inline RealMatrix qpd_grid(const FieldDensityMatrix& rho, const PhaseGrid& grid, double s, QpdConvention conv,
                           unsigned threads = 0) {
  grid.validate();
  if (!(s < 1.0)) throw InvalidArgument("qpd_grid: s must be < 1 (s = 1 is singular)");
  const QpdEvaluator eval(rho);
  RealMatrix values(grid.n_re, grid.n_im);
  parallel_for(static_cast<std::size_t>(grid.size()), threads, [&](std::size_t flat) {
    const cplx alpha = grid.point(static_cast<Index>(flat));
    try {
      values(static_cast<Index>(flat) / grid.n_im, static_cast<Index>(flat) % grid.n_im) =
          eval.evaluate(alpha, s, conv).value;
    } catch (const std::exception& e) {
      throw GridPointError(alpha, "qpd_grid at alpha = (" + std::to_string(alpha.real()) + ", " +
                                      std::to_string(alpha.imag()) + "): " + e.what());
    }
  });
  return values;
}

/// 2-D trapezoidal rule with d^2 alpha = d(Re) d(Im).
inline double grid_integral(const RealMatrix& values, const PhaseGrid& grid) {
  grid.validate();
  if (values.rows() != grid.n_re || values.cols() != grid.n_im)
    throw InvalidArgument("grid_integral: value matrix does not match grid");
  double sum = 0.0;
  for (Index i = 0; i < grid.n_re; ++i) {
    const double wi = (i == 0 || i == grid.n_re - 1) ? 0.5 : 1.0;
    for (Index j = 0; j < grid.n_im; ++j) {
      const double wj = (j == 0 || j == grid.n_im - 1) ? 0.5 : 1.0;
      sum += wi * wj * values(i, j);
    }
  }
  return sum * grid.d_re() * grid.d_im();
}

}  // namespace qpdrec

#endif  // QPDREC_QUASIPROBABILITY_HPP
