#ifndef QPDREC_FOCK_ALGEBRA_HPP
#define QPDREC_FOCK_ALGEBRA_HPP

#include <cmath>
#include <string>
#include <utility>

#include "qpdrec/common.hpp"
#include "qpdrec/jacobi.hpp"

namespace qpdrec {

// ---------------------------------------------------------------------------
// Field-space types
// ---------------------------------------------------------------------------

/// Dense operator on the truncated Fock space |0>..|N-1>.
class FockOperator {
 public:
  explicit FockOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("FockOperator: matrix is not square");
    if (m_.rows() < 2) throw InvalidArgument("FockOperator: dimension must be >= 2");
    if (!all_finite(m_)) throw InvalidArgument("FockOperator: non-finite entries");
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  FockOperator adjoint() const { return FockOperator(m_.adjoint()); }

 private:
  Matrix m_;
};

/// Field density matrix. Construction enforces Hermiticity (1e-10), a real
/// trace in (0, 1 + 1e-10] and positive semidefiniteness (min eigenvalue
/// >= -1e-8). `tail_mass` records probability lost to truncation when the
/// state was built from an infinite-dimensional formula.
class FieldDensityMatrix {
 public:
  explicit FieldDensityMatrix(Matrix m, double tail_mass = 0.0)
      : m_(std::move(m)), tail_mass_(tail_mass) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("FieldDensityMatrix: matrix is not square");
    if (m_.rows() < 2) throw InvalidArgument("FieldDensityMatrix: dimension must be >= 2");
    if (!all_finite(m_)) throw InvalidArgument("FieldDensityMatrix: non-finite entries");
    if (hermiticity_error(m_) > 1e-10) throw InvalidArgument("FieldDensityMatrix: not Hermitian");
    const cplx tr = m_.trace();
    if (std::abs(tr.imag()) > 1e-10 || tr.real() <= 0.0 || tr.real() > 1.0 + 1e-10)
      throw InvalidArgument("FieldDensityMatrix: trace outside (0, 1]");
    if (hermitian_min_eigenvalue(m_) < -1e-8)
      throw InvalidArgument("FieldDensityMatrix: not positive semidefinite");
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }
  double tail_mass() const noexcept { return tail_mass_; }
  double trace() const { return m_.trace().real(); }

  /// Same state embedded in a larger Fock space (zero padding).
  FieldDensityMatrix padded(Index new_dim) const {
    if (new_dim < dim()) throw InvalidArgument("FieldDensityMatrix::padded: cannot shrink");
    Matrix big = Matrix::Zero(new_dim, new_dim);
    big.topLeftCorner(dim(), dim()) = m_;
    return FieldDensityMatrix(std::move(big), tail_mass_);
  }

 private:
  Matrix m_;
  double tail_mass_;
};

// ---------------------------------------------------------------------------
// Atomic space, basis {|e>, |g>} with |e> first
// ---------------------------------------------------------------------------

class AtomOperator {
 public:
  AtomOperator() : m_(Eigen::Matrix2cd::Zero()) {}
  explicit AtomOperator(const Eigen::Matrix2cd& m) : m_(m) {}

  const Eigen::Matrix2cd& matrix() const noexcept { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  friend AtomOperator operator*(const AtomOperator& a, const AtomOperator& b) {
    return AtomOperator(a.m_ * b.m_);
  }
  friend AtomOperator operator+(const AtomOperator& a, const AtomOperator& b) {
    return AtomOperator(a.m_ + b.m_);
  }
  friend AtomOperator operator*(cplx c, const AtomOperator& a) { return AtomOperator(c * a.m_); }

 private:
  Eigen::Matrix2cd m_;
};

inline constexpr Index kExcited = 0;
inline constexpr Index kGround = 1;

namespace atom {

inline AtomOperator identity() { return AtomOperator(Eigen::Matrix2cd::Identity()); }

inline AtomOperator sigma_z() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(kExcited, kExcited) = 1.0;
  m(kGround, kGround) = -1.0;
  return AtomOperator(m);
}

/// |e><g|
inline AtomOperator sigma_plus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(kExcited, kGround) = 1.0;
  return AtomOperator(m);
}

/// |g><e|
inline AtomOperator sigma_minus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(kGround, kExcited) = 1.0;
  return AtomOperator(m);
}

/// (sigma_+ + sigma_-)/2, halved convention.
inline AtomOperator sigma_x() { return AtomOperator(0.5 * (sigma_plus().matrix() + sigma_minus().matrix())); }

/// (sigma_+ - sigma_-)/(2i), halved convention.
inline AtomOperator sigma_y() {
  return AtomOperator((sigma_plus().matrix() - sigma_minus().matrix()) / (2.0 * kI));
}

/// sigma_+ sigma_- = |e><e|
inline AtomOperator excited_projector() { return sigma_plus() * sigma_minus(); }

/// sigma_- sigma_+ = |g><g|
inline AtomOperator ground_projector() { return sigma_minus() * sigma_plus(); }

/// |psi> = sin(theta)|e> + cos(theta)|g>, as a projector.
inline AtomOperator superposition_state(double theta) {
  Eigen::Vector2cd psi;
  psi(kExcited) = std::sin(theta);
  psi(kGround) = std::cos(theta);
  return AtomOperator(psi * psi.adjoint());
}

}  // namespace atom

// ---------------------------------------------------------------------------
// Joint atom (x) field space, atom-major: index = atom * N + n
// ---------------------------------------------------------------------------

class JointOperator {
 public:
  explicit JointOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 4 || m_.rows() % 2 != 0)
      throw InvalidArgument("JointOperator: expected a square matrix of even dimension >= 4");
  }

  Index dim() const noexcept { return m_.rows(); }
  Index field_dim() const noexcept { return m_.rows() / 2; }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

/// Joint state; Hermitian to 1e-10, finite. Trace is not constrained here
/// because partial solutions (rho_1, rho_2) share this type.
class JointDensityMatrix {
 public:
  explicit JointDensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 4 || m_.rows() % 2 != 0)
      throw InvalidArgument("JointDensityMatrix: expected a square matrix of even dimension >= 4");
    if (!all_finite(m_)) throw InvalidArgument("JointDensityMatrix: non-finite entries");
    if (hermiticity_error(m_) > 1e-10) throw InvalidArgument("JointDensityMatrix: not Hermitian");
  }

  Index dim() const noexcept { return m_.rows(); }
  Index field_dim() const noexcept { return m_.rows() / 2; }
  const Matrix& matrix() const noexcept { return m_; }
  cplx trace() const { return m_.trace(); }

  /// Field block <a| rho |b> for atomic indices a, b in {kExcited, kGround}.
  Matrix block(Index a, Index b) const {
    const Index n = field_dim();
    return m_.block(a * n, b * n, n, n);
  }

  friend JointDensityMatrix operator+(const JointDensityMatrix& x, const JointDensityMatrix& y) {
    return JointDensityMatrix(x.m_ + y.m_);
  }

 private:
  Matrix m_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct LadderOps {
  FockOperator annihilation;
  FockOperator creation;
  FockOperator number;
};

inline LadderOps ladder_ops(Index n) {
  if (n < 2) throw InvalidArgument("ladder_ops: truncation must be >= 2");
  Matrix a = Matrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  Matrix num = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) num(k, k) = static_cast<double>(k);
  Matrix adag = a.adjoint();
  return {FockOperator(std::move(a)), FockOperator(std::move(adag)), FockOperator(std::move(num))};
}

/// True when |alpha|^2 > N/4, where truncation artifacts are expected.
inline bool displacement_exceeds_guideline(cplx alpha, Index n) {
  return std::norm(alpha) > static_cast<double>(n) / 4.0;
}

/// exp(alpha a^dag - alpha^* a) on the truncated space by scaling and
/// squaring with a Taylor series summed to convergence.
inline FockOperator displacement(cplx alpha, Index n) {
  if (n < 2) throw InvalidArgument("displacement: truncation must be >= 2");
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw InvalidArgument("displacement: non-finite amplitude");

  Matrix gen = Matrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) {
    const double s = std::sqrt(static_cast<double>(k));
    gen(k, k - 1) = alpha * s;             // alpha a^dag
    gen(k - 1, k) = -std::conj(alpha) * s;  // -alpha^* a
  }

  // Infinity norm bound; scale until below 1/2.
  const double norm = gen.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  gen /= std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = (term * gen) / static_cast<double>(k);
    result += term;
    if (max_abs(term) < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return FockOperator(std::move(result));
}

/// Displacement operators of a fixed truncation, built from one spectral
/// decomposition of the real generator K = a^dag - a:
///   D(r e^{i phi}) = U_phi exp(r K) U_phi^dag,  U_phi = exp(i phi n).
/// Gives the same truncated exponential as `displacement` but costs O(N^2)
/// per state vector, which keeps phase-space grids cheap.
class DisplacementFamily {
 public:
  explicit DisplacementFamily(Index n) : n_(n) {
    if (n < 2) throw InvalidArgument("DisplacementFamily: truncation must be >= 2");
    // H = i K is Hermitian, so K = -i V diag(lambda) V^dag.
    Matrix h = Matrix::Zero(n, n);
    for (Index k = 1; k < n; ++k) {
      const double s = std::sqrt(static_cast<double>(k));
      h(k, k - 1) = kI * s;
      h(k - 1, k) = -kI * s;
    }
    auto eig = hermitian_eigen(h);
    lambda_ = std::move(eig.values);
    v_ = std::move(eig.vectors);
  }

  Index dim() const noexcept { return n_; }

  /// D(alpha)^dag psi
  Vector apply_adjoint(cplx alpha, const Vector& psi) const {
    return apply(-alpha, psi);
  }

  /// D(alpha) psi
  Vector apply(cplx alpha, const Vector& psi) const {
    const double r = std::abs(alpha);
    const double phi = std::arg(alpha);
    Vector w(n_);
    for (Index k = 0; k < n_; ++k) w(k) = std::polar(1.0, -phi * static_cast<double>(k)) * psi(k);
    Vector y = v_.adjoint() * w;
    for (Index k = 0; k < n_; ++k) y(k) *= std::polar(1.0, -r * lambda_(k));
    w = v_ * y;
    for (Index k = 0; k < n_; ++k) w(k) *= std::polar(1.0, phi * static_cast<double>(k));
    return w;
  }

  Matrix matrix(cplx alpha) const {
    Matrix out(n_, n_);
    for (Index k = 0; k < n_; ++k) out.col(k) = apply(alpha, Vector::Unit(n_, k));
    return out;
  }

 private:
  Index n_;
  RealVector lambda_;
  Matrix v_;
};

/// Coherent state renormalized over the truncated basis; rejects a
/// pre-normalization tail mass above 1e-6.
inline FieldDensityMatrix coherent_state(cplx beta, Index n) {
  if (n < 2) throw InvalidArgument("coherent_state: truncation must be >= 2");
  Vector psi(n);
  cplx amp = std::exp(-0.5 * std::norm(beta));
  for (Index k = 0; k < n; ++k) {
    if (k > 0) amp *= beta / std::sqrt(static_cast<double>(k));
    psi(k) = amp;
  }
  const double kept = psi.squaredNorm();
  const double tail = std::max(0.0, 1.0 - kept);
  if (tail > 1e-6)
    throw InvalidArgument("coherent_state: tail mass " + std::to_string(tail) +
                          " exceeds 1e-6; increase the Fock truncation");
  psi /= std::sqrt(kept);
  return FieldDensityMatrix(psi * psi.adjoint(), tail);
}

inline FieldDensityMatrix fock_state(Index photons, Index n) {
  if (n < 2) throw InvalidArgument("fock_state: truncation must be >= 2");
  if (photons < 0 || photons >= n) throw InvalidArgument("fock_state: photon number outside [0, N)");
  Matrix m = Matrix::Zero(n, n);
  m(photons, photons) = 1.0;
  return FieldDensityMatrix(std::move(m));
}

/// Bose-Einstein populations nbar^k / (1+nbar)^{k+1}, renormalized.
inline FieldDensityMatrix thermal_state(double nbar, Index n) {
  if (n < 2) throw InvalidArgument("thermal_state: truncation must be >= 2");
  if (!(nbar >= 0.0)) throw InvalidArgument("thermal_state: mean photon number must be >= 0");
  const double ratio = nbar / (1.0 + nbar);
  Matrix m = Matrix::Zero(n, n);
  double p = 1.0 / (1.0 + nbar);
  double kept = 0.0;
  for (Index k = 0; k < n; ++k) {
    m(k, k) = p;
    kept += p;
    p *= ratio;
  }
  const double tail = std::max(0.0, 1.0 - kept);
  if (tail > 1e-6)
    throw InvalidArgument("thermal_state: tail mass " + std::to_string(tail) +
                          " exceeds 1e-6; increase the Fock truncation");
  m /= kept;
  return FieldDensityMatrix(std::move(m), tail);
}

/// Atom-major Kronecker product A (x) F.
inline JointOperator tensor_atom_field(const AtomOperator& a, const FockOperator& f) {
  const Index n = f.dim();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      if (a(i, j) != 0.0) out.block(i * n, j * n, n, n) = a(i, j) * f.matrix();
  return JointOperator(std::move(out));
}

inline JointOperator tensor_atom_field(const AtomOperator& a, const FieldDensityMatrix& f) {
  return tensor_atom_field(a, FockOperator(f.matrix()));
}

/// Tr(rho O)
inline cplx expectation(const JointDensityMatrix& rho, const JointOperator& op) {
  if (rho.dim() != op.dim()) throw InvalidArgument("expectation: dimension mismatch");
  // Tr(AB) = sum_ij A_ij B_ji
  return (rho.matrix().transpose().cwiseProduct(op.matrix())).sum();
}

/// D^dag(alpha) rho D(alpha), the field as seen from the displaced frame.
inline FieldDensityMatrix displaced_field(const FieldDensityMatrix& rho, cplx alpha) {
  const FockOperator d = displacement(alpha, rho.dim());
  Matrix out = d.matrix().adjoint() * rho.matrix() * d.matrix();
  out = 0.5 * (out + out.adjoint()).eval();
  return FieldDensityMatrix(std::move(out), rho.tail_mass());
}

/// rho_A (x) rho_F as a joint state.
inline JointDensityMatrix product_state(const AtomOperator& atom_state, const FieldDensityMatrix& field) {
  return JointDensityMatrix(tensor_atom_field(atom_state, field).matrix());
}

}  // namespace qpdrec

#endif  // QPDREC_FOCK_ALGEBRA_HPP
