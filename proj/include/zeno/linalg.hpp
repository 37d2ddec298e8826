#pragma once

// Dense complex linear algebra for Lindblad generators and their
// propagators. Natural units (hbar = 1); density matrices are vectorized
// by column stacking, so vec(A X B) = (B^T kron A) vec(X).

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace zeno {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Largest Hilbert-space dimension handled by the dense routines.
inline constexpr std::size_t kMaxDim = 64;

Matrix kron(const Matrix& a, const Matrix& b);
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index dim);

/// Max-abs deviation from Hermiticity.
double hermiticity_defect(const Matrix& m);

class Liouvillian;
class DensityMatrix;
DensityMatrix propagate(const Liouvillian& l, const DensityMatrix& rho, double t);

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  static DensityMatrix make(Matrix entries);
  static DensityMatrix pure(const Vector& psi);
  /// |k><k| in a dim-dimensional space.
  static DensityMatrix basis(std::size_t dim, std::size_t k);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  cplx trace() const { return m_.trace(); }

 private:
  friend DensityMatrix propagate(const Liouvillian& l, const DensityMatrix& rho, double t);
  struct Trusted {};
  DensityMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  Matrix m_;
};

/// Generator L(X) = -i[H, X] + sum_k (A_k X A_k^+ - 1/2 {A_k^+ A_k, X}).
class Liouvillian {
 public:
  Liouvillian(Matrix hamiltonian, std::vector<Matrix> collapse_ops);

  std::size_t dim() const { return static_cast<std::size_t>(h_.rows()); }
  const Matrix& hamiltonian() const { return h_; }
  const std::vector<Matrix>& collapse_ops() const { return ops_; }

  Matrix apply(const Matrix& x) const;
  /// dim^2 x dim^2 matrix acting on column-stacked density matrices.
  Matrix superoperator() const;
  /// Upper bound on the induced norm of the generator.
  double norm_bound() const;

 private:
  Matrix h_;
  std::vector<Matrix> ops_;
  Matrix jump_sum_;  // sum_k A_k^+ A_k
};

Liouvillian build_liouvillian(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops);

/// exp(m) by scaling and squaring with a diagonal Pade approximant.
Matrix matrix_exp(const Matrix& m);

/// Superoperator acting on vectorized dim x dim matrices.
class Propagator {
 public:
  Propagator(std::size_t dim, Matrix superoperator);
  static Propagator identity(std::size_t dim);
  /// exp(L t) built from the dense superoperator.
  static Propagator from_generator(const Liouvillian& l, double t);

  std::size_t dim() const { return dim_; }
  const Matrix& superoperator() const { return s_; }
  Matrix apply(const Matrix& x) const;

 private:
  std::size_t dim_;
  Matrix s_;
};

/// Action of p1 after p2.
Propagator compose(const Propagator& p1, const Propagator& p2);

/// exp(L t) applied to x, without forming the superoperator. Accepts any
/// dim x dim matrix (not only unit-trace states).
Matrix propagate(const Liouvillian& l, const Matrix& x, double t);
DensityMatrix propagate(const Liouvillian& l, const DensityMatrix& rho, double t);

/// One piece of a piecewise-constant generator schedule.
struct Segment {
  const Liouvillian* generator;
  double duration;
};

Matrix propagate_piecewise(const std::vector<Segment>& segments, const Matrix& x);

}  // namespace zeno
