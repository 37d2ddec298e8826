#include <doctest.h>

#include <cmath>
#include <random>

#include "zeno/errors.hpp"
#include "zeno/linalg.hpp"

using namespace zeno;

namespace {

const cplx I(0.0, 1.0);

Matrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = cplx(nd(rng), nd(rng));
  return m;
}

Matrix random_hermitian(int n, std::mt19937& rng) {
  const Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

// exp(-i H t) from the eigendecomposition, an independent route.
Matrix unitary_by_eigen(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector ph(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) ph(k) = std::exp(-I * es.eigenvalues()(k) * t);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix random_density(int n, std::mt19937& rng) {
  const Matrix a = random_matrix(n, rng);
  Matrix r = a * a.adjoint();
  return r / r.trace();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("vec and unvec stack columns") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vec(m);
  CHECK(v(0) == cplx(1.0));
  CHECK(v(1) == cplx(3.0));
  CHECK(v(2) == cplx(2.0));
  CHECK(max_abs(unvec(v, 2) - m) == 0.0);
}

TEST_CASE("vec(A X B) = (B^T kron A) vec X") {
  std::mt19937 rng(1);
  const Matrix a = random_matrix(3, rng), x = random_matrix(3, rng), b = random_matrix(3, rng);
  CHECK((vec(a * x * b) - kron(b.transpose(), a) * vec(x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density matrix construction checks") {
  Matrix ok = Matrix::Zero(2, 2);
  ok(0, 0) = 0.25;
  ok(1, 1) = 0.75;
  CHECK_NOTHROW(DensityMatrix::make(ok));

  Matrix bad_trace = ok;
  bad_trace(1, 1) = 0.8;
  CHECK_THROWS_AS(DensityMatrix::make(bad_trace), ValidationError);

  Matrix not_herm = ok;
  not_herm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix::make(not_herm), ValidationError);

  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix::make(negative), ValidationError);

  CHECK_THROWS_AS(DensityMatrix::basis(65, 0), ConfigError);
  CHECK(DensityMatrix::basis(3, 2).matrix()(2, 2) == cplx(1.0));
}

TEST_CASE("build_liouvillian") {
  SUBCASE("zero generator") {
    const Liouvillian l = build_liouvillian(Matrix::Zero(3, 3), {});
    std::mt19937 rng(2);
    CHECK(max_abs(l.apply(random_matrix(3, rng))) == 0.0);
  }
  SUBCASE("commutator phase") {
    const double w = 1.7;
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = w;
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 1) = 1.0;
    const Matrix d = build_liouvillian(h, {}).apply(rho);
    CHECK(std::abs(d(0, 1) - I * w) < 1e-15);
  }
  SUBCASE("amplitude damping rate") {
    const double g = 0.3;
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = std::sqrt(g);
    Matrix rho = Matrix::Zero(2, 2);
    rho(1, 1) = 1.0;
    const Matrix d = build_liouvillian(Matrix::Zero(2, 2), {a}).apply(rho);
    CHECK(std::abs(d(1, 1) + g) < 1e-15);
    CHECK(std::abs(d(0, 0) - g) < 1e-15);
  }
  SUBCASE("errors") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(build_liouvillian(h, {}), ValidationError);
    CHECK_THROWS_AS(build_liouvillian(Matrix::Zero(2, 2), {Matrix::Zero(3, 3)}), ConfigError);
  }
  SUBCASE("superoperator agrees with apply") {
    std::mt19937 rng(3);
    const Liouvillian l = build_liouvillian(random_hermitian(3, rng), {random_matrix(3, rng), random_matrix(3, rng)});
    const Matrix x = random_matrix(3, rng);
    CHECK((l.superoperator() * vec(x) - vec(l.apply(x))).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("Hermitian in, Hermitian out") {
    std::mt19937 rng(4);
    const Liouvillian l = build_liouvillian(random_hermitian(4, rng), {random_matrix(4, rng)});
    CHECK(hermiticity_defect(l.apply(random_hermitian(4, rng))) < 1e-12);
  }
}

TEST_CASE("matrix_exp") {
  CHECK(max_abs(matrix_exp(Matrix::Zero(4, 4)) - Matrix::Identity(4, 4)) == 0.0);

  Matrix d = Matrix::Zero(3, 3);
  const double th[3] = {0.3, -2.0, 40.0};
  for (int k = 0; k < 3; ++k) d(k, k) = I * th[k];
  const Matrix e = matrix_exp(d);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(e(k, k) - std::exp(I * th[k])) < 1e-13);

  std::mt19937 rng(5);
  Matrix m = random_matrix(4, rng);
  m /= m.cwiseAbs().colwise().sum().maxCoeff();
  CHECK(max_abs(matrix_exp(m) * matrix_exp(-m) - Matrix::Identity(4, 4)) < 1e-12);

  // Unitaries up to norm 100 against the eigendecomposition.
  for (double scale : {0.1, 1.0, 10.0, 100.0}) {
    Matrix h = random_hermitian(6, rng);
    h *= scale / h.cwiseAbs().colwise().sum().maxCoeff();
    const Matrix ref = unitary_by_eigen(h, 1.0);
    CHECK(max_abs(matrix_exp(-I * h) - ref) < 1e-12 * std::max(1.0, max_abs(ref)) * 10.0);
  }

  Matrix nan = Matrix::Zero(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(matrix_exp(nan), ValidationError);
}

TEST_CASE("propagate") {
  SUBCASE("zero time") {
    std::mt19937 rng(6);
    const Liouvillian l = build_liouvillian(random_hermitian(3, rng), {random_matrix(3, rng)});
    const Matrix rho = random_density(3, rng);
    CHECK(max_abs(propagate(l, rho, 0.0) - rho) == 0.0);
    CHECK_THROWS_AS(propagate(l, rho, -1.0), ValidationError);
  }
  SUBCASE("amplitude damping") {
    const double g = 0.7;
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = std::sqrt(g);
    const Liouvillian l = build_liouvillian(Matrix::Zero(2, 2), {a});
    const DensityMatrix rho = DensityMatrix::basis(2, 1);
    for (double gt : {0.1, 1.0, 5.0}) {
      const DensityMatrix out = propagate(l, rho, gt / g);
      CHECK(std::abs(out.matrix()(1, 1).real() - std::exp(-gt)) < 1e-9);
    }
  }
  SUBCASE("pure dephasing") {
    const double gamma = 0.4;
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    // sqrt(gamma/2) sigma_z damps coherences at rate gamma.
    const Liouvillian l = build_liouvillian(Matrix::Zero(2, 2), {std::sqrt(gamma / 2.0) * z});
    Vector psi(2);
    psi << 1.0, 1.0;
    const DensityMatrix rho = DensityMatrix::pure(psi);
    for (double t : {0.5, 2.0, 7.0}) {
      const Matrix out = propagate(l, rho, t).matrix();
      CHECK(std::abs(std::abs(out(0, 1)) - 0.5 * std::exp(-gamma * t)) < 1e-10);
    }
  }
  SUBCASE("closed system matches the eigendecomposition") {
    std::mt19937 rng(7);
    const Matrix h = random_hermitian(5, rng);
    const Matrix rho = random_density(5, rng);
    const Matrix u = unitary_by_eigen(h, 3.0);
    CHECK(max_abs(propagate(build_liouvillian(h, {}), rho, 3.0) - u * rho * u.adjoint()) < 1e-11);
  }
  SUBCASE("open system matches the dense superoperator exponential") {
    std::mt19937 rng(8);
    const Liouvillian l = build_liouvillian(random_hermitian(4, rng), {0.5 * random_matrix(4, rng)});
    const Matrix rho = random_density(4, rng);
    const Matrix ref = Propagator::from_generator(l, 2.5).apply(rho);
    CHECK(max_abs(propagate(l, rho, 2.5) - ref) < 1e-10);
  }
}

TEST_CASE("trace, Hermiticity, semigroup and linearity over long times") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    Matrix h = random_hermitian(4, rng);
    h *= 3.0 / h.cwiseAbs().colwise().sum().maxCoeff();
    Matrix a = random_matrix(4, rng);
    a *= 1.0 / a.cwiseAbs().colwise().sum().maxCoeff();
    const Liouvillian l = build_liouvillian(h, {a});
    const Matrix r1 = random_density(4, rng), r2 = random_density(4, rng);
    for (double t : {0.0, 0.3, 10.0, 100.0}) {
      const Matrix out = propagate(l, r1, t);
      CHECK(std::abs(out.trace() - 1.0) < 1e-10);
      CHECK(hermiticity_defect(out) < 1e-10);
    }
    const double s = 1.3, t = 2.1;
    CHECK(max_abs(propagate(l, propagate(l, r1, s), t) - propagate(l, r1, s + t)) < 1e-9);
    const cplx ca(0.3, 0.0), cb(-1.2, 0.0);
    const Matrix lhs = propagate(l, ca * r1 + cb * r2, t);
    const Matrix rhs = ca * propagate(l, r1, t) + cb * propagate(l, r2, t);
    CHECK(max_abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("propagators compose") {
  std::mt19937 rng(10);
  const Liouvillian l = build_liouvillian(random_hermitian(3, rng), {0.5 * random_matrix(3, rng)});
  const Propagator p = Propagator::from_generator(l, 0.7);
  CHECK(max_abs(compose(Propagator::identity(3), p).superoperator() - p.superoperator()) < 1e-15);
  const Propagator q = Propagator::from_generator(l, 1.1);
  CHECK(max_abs(compose(p, q).superoperator() - Propagator::from_generator(l, 1.8).superoperator()) < 1e-10);

  const Liouvillian other = build_liouvillian(random_hermitian(3, rng), {});
  const Propagator r = Propagator::from_generator(other, 0.9);
  CHECK(max_abs(compose(p, r).superoperator() - compose(r, p).superoperator()) > 1e-3);

  // Associativity and order: compose(p1, p2) applies p2 first.
  const Matrix x = random_density(3, rng);
  CHECK(max_abs(compose(p, r).apply(x) - p.apply(r.apply(x))) < 1e-12);
  CHECK(max_abs(compose(compose(p, q), r).superoperator() - compose(p, compose(q, r)).superoperator()) < 1e-12);

  CHECK_THROWS_AS(compose(p, Propagator::identity(2)), ConfigError);
}

TEST_CASE("piecewise propagation") {
  std::mt19937 rng(11);
  const Liouvillian a = build_liouvillian(random_hermitian(3, rng), {});
  const Liouvillian b = build_liouvillian(random_hermitian(3, rng), {0.3 * random_matrix(3, rng)});
  const Matrix rho = random_density(3, rng);
  const Matrix ref = propagate(b, propagate(a, rho, 0.4), 1.5);
  CHECK(max_abs(propagate_piecewise({{&a, 0.4}, {&b, 1.5}}, rho) - ref) < 1e-14);
}
