#ifndef QPDREC_JACOBI_HPP
#define QPDREC_JACOBI_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpdrec/common.hpp"

namespace qpdrec {

struct HermitianEigen {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors, same order as values
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of a(p,q) with a diagonal unitary,
/// then applies a real Givens rotation that zeroes it. Sweeps continue until
/// the off-diagonal Frobenius norm is below 1e-12 (scaled by the matrix norm
/// when that exceeds one).
inline HermitianEigen hermitian_eigen(const Matrix& h, bool want_vectors = true) {
  if (h.rows() != h.cols())
    throw InvalidArgument("hermitian_eigen: matrix is not square");
  if (!all_finite(h)) throw InvalidArgument("hermitian_eigen: non-finite entries");
  if (hermiticity_error(h) > 1e-8)
    throw InvalidArgument("hermitian_eigen: matrix is not Hermitian");

  const Index n = h.rows();
  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = want_vectors ? Matrix::Identity(n, n) : Matrix();
  const double tol = 1e-12 * std::max(1.0, a.norm());

  for (int sweep = 0; sweep < 100 && detail::off_diagonal_norm(a) > tol; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r == 0.0) continue;
        // Phase step: scale row/column q so that a(p,q) becomes real positive.
        const cplx phase = a(p, q) / r;  // e^{i phi}
        a.col(q) *= std::conj(phase);
        a.row(q) *= phase;
        a(q, q) = a(q, q).real();
        if (want_vectors) v.col(q) *= std::conj(phase);

        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (Index k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * r;
        a(q, q) = aqq + t * r;
        if (want_vectors) {
          for (Index k = 0; k < n; ++k) {
            const cplx vkp = v(k, p);
            const cplx vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return a(x, x).real() < a(y, y).real(); });

  HermitianEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src).real();
    if (want_vectors) out.vectors.col(i) = v.col(src);
  }
  return out;
}

inline double hermitian_min_eigenvalue(const Matrix& h) {
  return hermitian_eigen(h, false).values(0);
}

}  // namespace qpdrec

#endif  // QPDREC_JACOBI_HPP
