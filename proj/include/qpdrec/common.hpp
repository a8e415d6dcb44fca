#ifndef QPDREC_COMMON_HPP
#define QPDREC_COMMON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpdrec {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the RK4 oracle when the trace drifts past tolerance or the
/// state stops being finite.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No phi = pi crossing of z(t) exists within the scanned horizon.
class NoCrossing : public std::runtime_error {
 public:
  NoCrossing(double horizon, const std::string& what)
      : std::runtime_error(what), horizon_(horizon) {}
  double horizon() const noexcept { return horizon_; }

 private:
  double horizon_;
};

/// A failure at one phase-space point, tagged with its coordinates.
class GridPointError : public std::runtime_error {
 public:
  GridPointError(cplx alpha, const std::string& what)
      : std::runtime_error(what), alpha_(alpha) {}
  cplx alpha() const noexcept { return alpha_; }

 private:
  cplx alpha_;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

}  // namespace qpdrec

#endif  // QPDREC_COMMON_HPP
