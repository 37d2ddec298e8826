#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "zeno/errors.hpp"
#include "zeno/quadrature.hpp"

using namespace zeno;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 8, 16}) {
    const quad::Rule& r = quad::gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += r.weights[k] * std::pow(r.nodes[k], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(std::abs(s - exact) < 1e-14);
    }
  }
}

TEST_CASE("composite rule on a smooth function") {
  const quad::Rule r = quad::composite_gauss(0.0, 3.0, 6, 8);
  CHECK(r.nodes.size() == 48);
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) s += r.weights[k] * std::cos(5.0 * r.nodes[k]);
  CHECK(std::abs(s - std::sin(15.0) / 5.0) < 1e-14);
}

TEST_CASE("adaptive integration") {
  const double inf = std::numeric_limits<double>::infinity();
  SUBCASE("finite interval with a kink") {
    const auto r = quad::integrate([](double x) { return std::abs(x - 0.3); }, {0.0, 1.0});
    CHECK(std::abs(r.value - (0.045 + 0.245)) < 1e-10);
  }
  SUBCASE("Lorentzian over the real line") {
    const auto r = quad::integrate([](double x) { return 1.0 / (1.0 + x * x); }, {-inf, 0.0, inf});
    CHECK(std::abs(r.value - std::numbers::pi) < 1e-9);
  }
  SUBCASE("Gaussian on a half line") {
    const auto r = quad::integrate([](double x) { return std::exp(-x * x); }, {0.0, inf});
    CHECK(std::abs(r.value - 0.5 * std::sqrt(std::numbers::pi)) < 1e-10);
  }
  SUBCASE("interval budget exhausted") {
    const auto f = [](double x) { return x == 0.0 ? 0.0 : std::sin(1.0 / x) / x; };
    CHECK_THROWS_AS(quad::integrate(f, {1e-9, 1.0}, {1e-15, 1e-15, 50}), NumericsError);
  }
}
