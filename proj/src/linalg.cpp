#include "zeno/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPsdTol = 1e-10;

void check_dim(Eigen::Index d) {
  if (d <= 0) throw ConfigError("matrix dimension must be positive");
  if (static_cast<std::size_t>(d) > kMaxDim)
    throw ConfigError("dimension " + std::to_string(d) + " exceeds the dense cap of " +
                      std::to_string(kMaxDim));
}

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

DensityMatrix DensityMatrix::make(Matrix entries) {
  if (entries.rows() != entries.cols()) throw ConfigError("density matrix must be square");
  check_dim(entries.rows());
  if (!entries.allFinite()) throw ValidationError("density matrix has non-finite entries");
  if (hermiticity_defect(entries) > kHermitianTol)
    throw ValidationError("density matrix is not Hermitian");
  if (std::abs(entries.trace() - cplx(1.0)) > kTraceTol)
    throw ValidationError("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw ValidationError("density matrix is not positive semidefinite");
  return DensityMatrix(std::move(entries), Trusted{});
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ValidationError("zero state vector");
  const Vector u = psi / n;
  return make(u * u.adjoint());
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t k) {
  if (k >= dim) throw ConfigError("basis index out of range");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  return make(std::move(m));
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(Matrix hamiltonian, std::vector<Matrix> collapse_ops)
    : h_(std::move(hamiltonian)), ops_(std::move(collapse_ops)) {
  if (h_.rows() != h_.cols()) throw ConfigError("Hamiltonian must be square");
  check_dim(h_.rows());
  if (!h_.allFinite()) throw ValidationError("Hamiltonian has non-finite entries");
  if (hermiticity_defect(h_) > kHermitianTol) throw ValidationError("Hamiltonian is not Hermitian");
  jump_sum_ = Matrix::Zero(h_.rows(), h_.cols());
  for (const auto& a : ops_) {
    if (a.rows() != h_.rows() || a.cols() != h_.cols())
      throw ConfigError("collapse operator dimension does not match the Hamiltonian");
    if (!a.allFinite()) throw ValidationError("collapse operator has non-finite entries");
    jump_sum_.noalias() += a.adjoint() * a;
  }
}

Matrix Liouvillian::apply(const Matrix& x) const {
  const cplx i(0.0, 1.0);
  Matrix out = -i * (h_ * x - x * h_);
  if (ops_.empty()) return out;
  for (const auto& a : ops_) out.noalias() += a * x * a.adjoint();
  out.noalias() -= 0.5 * (jump_sum_ * x + x * jump_sum_);
  return out;
}

Matrix Liouvillian::superoperator() const {
  const Eigen::Index d = h_.rows();
  const Matrix id = Matrix::Identity(d, d);
  const cplx i(0.0, 1.0);
  Matrix s = -i * (kron(id, h_) - kron(h_.transpose(), id));
  for (const auto& a : ops_) s += kron(a.conjugate(), a);
  if (!ops_.empty()) s -= 0.5 * (kron(id, jump_sum_) + kron(jump_sum_.transpose(), id));
  return s;
}

double Liouvillian::norm_bound() const {
  double b = 2.0 * one_norm(h_);
  for (const auto& a : ops_) b += 2.0 * one_norm(a) * one_norm(a.adjoint());
  return b;
}

Liouvillian build_liouvillian(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops) {
  return Liouvillian(hamiltonian, collapse_ops);
}

// ---------------------------------------------------------------------------
// Scaling and squaring with Pade degrees 3..13 (Higham 2005 thresholds).

namespace {

constexpr std::array<double, 4> kPade3 = {120., 60., 12., 1.};
constexpr std::array<double, 6> kPade5 = {30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kPade7 = {17297280., 8648640., 1995840., 277200.,
                                          25200.,    1512.,    56.,      1.};
constexpr std::array<double, 10> kPade9 = {17643225600., 8821612800., 2075673600., 302702400.,
                                           30270240.,    2162160.,    110880.,     3960.,
                                           90.,          1.};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
    129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
    1323241920.,        40840800.,          960960.,           16380.,
    182.,               1.};

template <std::size_t N>
Matrix pade_low(const Matrix& a, const std::array<double, N>& b) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix even = b[0] * id;
  Matrix odd = b[1] * id;
  Matrix pw = id;
  for (std::size_t k = 1; 2 * k < N; ++k) {
    pw = pw * a2;
    even += b[2 * k] * pw;
    if (2 * k + 1 < N) odd += b[2 * k + 1] * pw;
  }
  const Matrix u = a * odd;
  return (even - u).partialPivLu().solve(even + u);
}

Matrix pade13(const Matrix& a) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Matrix u = a6 * inner_u;
  u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u = a * u;
  Matrix inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
  Matrix v = a6 * inner_v;
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("matrix_exp needs a square matrix");
  if (!m.allFinite()) throw ValidationError("matrix_exp input has non-finite entries");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const double nrm = one_norm(m);
  if (nrm == 0.0) return Matrix::Identity(n, n);
  if (nrm <= 1.495585217958292e-2) return pade_low(m, kPade3);
  if (nrm <= 2.539398330063230e-1) return pade_low(m, kPade5);
  if (nrm <= 9.504178996162932e-1) return pade_low(m, kPade7);
  if (nrm <= 2.097847961257068e0) return pade_low(m, kPade9);
  constexpr double theta13 = 5.371920351148152;
  int s = 0;
  if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  Matrix r = pade13(m / std::ldexp(1.0, s));
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

// ---------------------------------------------------------------------------

Propagator::Propagator(std::size_t dim, Matrix superoperator) : dim_(dim), s_(std::move(superoperator)) {
  const auto d2 = static_cast<Eigen::Index>(dim * dim);
  if (s_.rows() != d2 || s_.cols() != d2)
    throw ConfigError("superoperator shape does not match dim^2");
}

Propagator Propagator::identity(std::size_t dim) {
  const auto d2 = static_cast<Eigen::Index>(dim * dim);
  return Propagator(dim, Matrix::Identity(d2, d2));
}

Propagator Propagator::from_generator(const Liouvillian& l, double t) {
  if (t < 0.0) throw ValidationError("propagation time must be non-negative");
  return Propagator(l.dim(), matrix_exp(l.superoperator() * t));
}

Matrix Propagator::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != dim_ || x.rows() != x.cols())
    throw ConfigError("operand dimension does not match the propagator");
  return unvec(s_ * vec(x), x.rows());
}

Propagator compose(const Propagator& p1, const Propagator& p2) {
  if (p1.dim() != p2.dim()) throw ConfigError("cannot compose propagators of different dimension");
  return Propagator(p1.dim(), p1.superoperator() * p2.superoperator());
}

// ---------------------------------------------------------------------------

namespace {

// Closed system: conjugate by the spectral decomposition of H.
Matrix propagate_unitary(const Matrix& h, const Matrix& x, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Matrix& v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();
  Matrix y = v.adjoint() * x * v;
  for (Eigen::Index a = 0; a < y.rows(); ++a)
    for (Eigen::Index b = 0; b < y.cols(); ++b) y(a, b) *= std::exp(cplx(0.0, -(e(a) - e(b)) * t));
  return v * y * v.adjoint();
}

// Open system: truncated Taylor series over substeps with h*||L|| <= 1.
Matrix propagate_taylor(const Liouvillian& l, const Matrix& x, double t) {
  const double nrm = l.norm_bound() * t;
  const int steps = std::max(1, static_cast<int>(std::ceil(nrm)));
  const double h = t / steps;
  Matrix acc = x;
  for (int s = 0; s < steps; ++s) {
    Matrix term = acc;
    Matrix sum = acc;
    const double scale = std::max(sum.cwiseAbs().maxCoeff(), 1e-300);
    for (int k = 1; k <= 60; ++k) {
      term = l.apply(term) * (h / k);
      sum += term;
      if (term.cwiseAbs().maxCoeff() <= 1e-18 * scale) break;
    }
    acc = std::move(sum);
  }
  return acc;
}

}  // namespace

Matrix propagate(const Liouvillian& l, const Matrix& x, double t) {
  if (t < 0.0) throw ValidationError("propagation time must be non-negative");
  if (static_cast<std::size_t>(x.rows()) != l.dim() || x.rows() != x.cols())
    throw ConfigError("operand dimension does not match the generator");
  if (t == 0.0) return x;
  if (l.collapse_ops().empty()) return propagate_unitary(l.hamiltonian(), x, t);
  // [H - cI, X] = [H, X]; centring the spectrum shrinks the Taylor step count.
  const Eigen::VectorXd diag = l.hamiltonian().diagonal().real();
  const double c = 0.5 * (diag.maxCoeff() + diag.minCoeff());
  const auto d = static_cast<Eigen::Index>(l.dim());
  const Liouvillian shifted(l.hamiltonian() - c * Matrix::Identity(d, d), l.collapse_ops());
  return propagate_taylor(shifted, x, t);
}

DensityMatrix propagate(const Liouvillian& l, const DensityMatrix& rho, double t) {
  return DensityMatrix(propagate(l, rho.matrix(), t), DensityMatrix::Trusted{});
}

Matrix propagate_piecewise(const std::vector<Segment>& segments, const Matrix& x) {
  Matrix y = x;
  for (const auto& seg : segments) y = propagate(*seg.generator, y, seg.duration);
  return y;
}

}  // namespace zeno
