#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "zeno/errors.hpp"
#include "zeno/spectral.hpp"

using namespace zeno;

namespace {

const double kPi = std::numbers::pi;
const LevelPair kEG{{0, 0}, {1, 0}};
const SystemSpec kSys({{"e", 1.0}, {"g", 0.0}});

// (1/pi) Re int_0^tau (1 - u/tau) e^{z u} du, z = i d - gamma.
double dephasing_profile(double d, double gamma, double tau) {
  const std::complex<double> z(-gamma, d);
  if (std::abs(z) * tau < 1e-6) return tau / (2 * kPi);
  return ((std::exp(z * tau) - 1.0 - z * tau) / (z * z * tau)).real() / kPi;
}

// Time-domain rate for a Lorentzian reservoir under exponential dephasing:
// the reservoir correlation S e^{i(w_if - c) u - hw u} times F(u) = e^{-gamma u}.
double lorentzian_rate(double strength, double center, double hw, double w_if, double gamma, double tau) {
  const std::complex<double> z(-(hw + gamma), w_if - center);
  return 2.0 * strength / tau * ((std::exp(z * tau) - 1.0 - z * tau) / (z * z)).real();
}

double trapezoid(const ReservoirSpectrum& g, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.5 * (g(lo) + g(hi));
  for (int k = 1; k < n; ++k) s += g(lo + k * h);
  return s * h;
}

}  // namespace

TEST_CASE("spectrum factories") {
  SUBCASE("lorentzian") {
    const auto g = ReservoirSpectrum::lorentzian(2.0, 0.1, 0.3);
    CHECK(to_string(g.kind()) == "lorentzian");
    CHECK(std::abs(g(2.0) - 0.3 / (kPi * 0.1)) < 1e-14);
    CHECK(std::abs(g(2.1) - 0.5 * 0.3 / (kPi * 0.1)) < 1e-14);
    CHECK(std::abs(trapezoid(g, -2000.0, 2000.0, 4000000) - 0.3) < 1e-4);
    CHECK_FALSE(g.bounded());
    CHECK_THROWS_AS(ReservoirSpectrum::lorentzian(1.0, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(ReservoirSpectrum::lorentzian(1.0, 1.0, -1.0), ValidationError);
  }
  SUBCASE("double lorentzian adds") {
    const auto g = ReservoirSpectrum::double_lorentzian({1.0, 0.2, 0.1}, {3.0, 0.5, 0.4});
    const auto a = ReservoirSpectrum::lorentzian(1.0, 0.2, 0.1), b = ReservoirSpectrum::lorentzian(3.0, 0.5, 0.4);
    for (double w : {-1.0, 1.0, 2.2, 3.0, 9.0}) CHECK(std::abs(g(w) - a(w) - b(w)) < 1e-15);
    CHECK(std::abs(g.strength() - 0.5) < 1e-15);
  }
  SUBCASE("flat window") {
    const auto g = ReservoirSpectrum::flat_window(0.5, 2.5, 0.04);
    CHECK(g.bounded());
    CHECK(g(1.0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(g(0.4) == 0.0);
    CHECK(g(2.6) == 0.0);
    CHECK_THROWS_AS(ReservoirSpectrum::flat_window(1.0, 1.0, 0.1), ValidationError);
  }
  SUBCASE("tabulated") {
    const auto g = ReservoirSpectrum::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(std::abs(g.strength() - 1.0) < 1e-15);
    CHECK(std::abs(g(0.25) - 0.25) < 1e-15);
    CHECK(g(-0.1) == 0.0);
    CHECK(g(2.1) == 0.0);
    CHECK_THROWS_AS(ReservoirSpectrum::tabulated({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(ReservoirSpectrum::tabulated({0.0, 1.0}, {1.0, -1.0}), ValidationError);
  }
}

TEST_CASE("sinc profile") {
  const BroadeningProfile p = sinc_profile(1.0, 4.0);
  const double d = 0.7;
  const double s = std::sin(2.0 * d);
  CHECK(std::abs(p(1.0 + d) - 2 * s * s / (kPi * 4.0 * d * d)) < 1e-14);
  CHECK(std::abs(p(1.0) - 4.0 / (2 * kPi)) < 1e-12);
  CHECK(std::abs(p(1.0 + 1e-7) - 4.0 / (2 * kPi)) < 1e-10);
  CHECK(std::abs(p.normalization() - 1.0) < 1e-5);
}

TEST_CASE("profile from a model") {
  const double tau = 3.0, w_if = 1.0;
  SUBCASE("projective reproduces the sinc form") {
    const BroadeningProfile a = broadening_profile(make_projective(tau), kEG, w_if, tau);
    const BroadeningProfile b = sinc_profile(w_if, tau);
    for (double d : {0.0, 0.3, -1.7, 5.0, 40.0, -300.0}) CHECK(std::abs(a(w_if + d) - b(w_if + d)) < 1e-9);
  }
  SUBCASE("dephasing against the closed form, inside and beyond the cutoff") {
    for (double gamma : {0.2, 1.0, 5.0}) {
      const BroadeningProfile p = broadening_profile(make_dephasing(gamma, tau), kEG, w_if, tau);
      CAPTURE(gamma);
      for (double d : {0.0, 0.1, -0.8, 3.0, 25.0}) {
        const double want = dephasing_profile(d, gamma, tau);
        CHECK(std::abs(p(w_if + d) - want) < 1e-9 * std::max(1.0, want));
      }
      for (double f : {1.01, 3.0, 100.0}) {
        const double d = -f * p.cutoff();
        const double want = dephasing_profile(d, gamma, tau);
        CHECK(std::abs(p(w_if + d) - want) <= 1e-5 * std::abs(want) + 1e-14);
      }
      CHECK(std::abs(p.normalization() - 1.0) < 1e-5);
    }
  }
  SUBCASE("continuity across the cutoff") {
    const BroadeningProfile p = broadening_profile(make_dephasing(0.5, tau), kEG, w_if, tau);
    const double c = p.cutoff();
    const double in = p(w_if + c * (1 - 1e-12)), out = p(w_if + c * (1 + 1e-12));
    CHECK(std::abs(in - out) <= 1e-6 * std::abs(in));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(broadening_profile(make_two_level_detector(kSys, 1.0, 3.0, tau, "e"), kEG, w_if, tau),
                    AssumptionError);
    CHECK_NOTHROW(broadening_profile(make_two_level_detector(kSys, 0.0, 3.0, tau, "e"), kEG, w_if, tau));
    CHECK_THROWS_AS(broadening_profile(make_dephasing(1.0, tau), LevelPair{{0, 0}, {0, 0}}, w_if, tau),
                    ValidationError);
  }
}

TEST_CASE("overlap rate") {
  SUBCASE("Lorentzian reservoir against the time-domain closed form") {
    const double w_if = 1.0;
    struct Case {
      double center, hw, gamma, tau;
    };
    for (const Case c : {Case{1.0, 0.05, 0.0, 2.0}, Case{1.3, 0.02, 0.5, 4.0}, Case{0.2, 0.3, 2.0, 1.0},
                         Case{1.1, 0.01, 0.0, 50.0}}) {
      const auto g = ReservoirSpectrum::lorentzian(c.center, c.hw, 0.01);
      const MeasurementModel m = c.gamma > 0 ? make_dephasing(c.gamma, c.tau) : make_projective(c.tau);
      const double got = overlap_decay_rate(g, broadening_profile(m, kEG, w_if, c.tau));
      const double want = lorentzian_rate(0.01, c.center, c.hw, w_if, c.gamma, c.tau);
      CAPTURE(c.center);
      CAPTURE(c.tau);
      CHECK(std::abs(got - want) <= 1e-6 * want);
    }
  }
  SUBCASE("flat window far wider than the profile gives 2 pi G") {
    const auto g = ReservoirSpectrum::flat_window(-500.0, 500.0, 1000.0 * 0.002);
    const double r = overlap_decay_rate(g, broadening_profile(make_dephasing(1.0, 10.0), kEG, 0.0, 10.0));
    CHECK(std::abs(r - 2 * kPi * 0.002) <= 2e-3 * 2 * kPi * 0.002);
  }
  SUBCASE("tabulated box equals the flat window") {
    const auto a = ReservoirSpectrum::flat_window(0.5, 1.5, 0.01);
    const auto b = ReservoirSpectrum::tabulated({0.5, 0.5 + 1e-12, 1.5 - 1e-12, 1.5}, {0.0, 0.01, 0.01, 0.0});
    const auto p = broadening_profile(make_dephasing(0.3, 5.0), kEG, 1.0, 5.0);
    CHECK(std::abs(overlap_decay_rate(a, p) - overlap_decay_rate(b, p)) < 1e-9 * overlap_decay_rate(a, p));
  }
}

TEST_CASE("sweep and classify") {
  const auto g = ReservoirSpectrum::lorentzian(1.1, 0.01, 0.001);
  const ModelFamily fam = [](double tau) { return make_projective(tau); };
  std::vector<double> grid;
  for (int k = 0; k < 16; ++k) grid.push_back(2.0 * std::pow(100.0, k / 15.0));
  const RegimeCurve c = sweep_and_classify(g, fam, kEG, 1.0, grid, 4);
  REQUIRE(c.rate.size() == grid.size());
  CHECK(c.intervals.size() == grid.size() - 1);
  CHECK(std::abs(c.rate_golden_rule - 2 * kPi * g(1.0)) < 1e-15);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(c.rate[k] - lorentzian_rate(0.001, 1.1, 0.01, 1.0, 0.0, grid[k])) <= 1e-6 * c.rate[k]);
    CHECK(c.above_golden_rule[k] == (c.rate[k] > c.rate_golden_rule));
  }
  bool zeno = false, anti = false;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dr = c.rate[k] - c.rate[k + 1];
    CHECK(c.intervals[k] == (dr < -1e-12 ? Regime::Zeno : dr > 1e-12 ? Regime::AntiZeno : Regime::Neutral));
    CHECK(c.point_label(k) == c.intervals[k]);
    zeno |= c.intervals[k] == Regime::Zeno;
    anti |= c.intervals[k] == Regime::AntiZeno;
  }
  CHECK(zeno);
  CHECK(anti);
  CHECK(c.point_label(grid.size() - 1) == c.intervals.back());

  // Thread count does not change results.
  const RegimeCurve serial = sweep_and_classify(g, fam, kEG, 1.0, grid, 1);
  CHECK(serial.rate == c.rate);

  std::vector<double> few(grid.begin(), grid.begin() + 7);
  CHECK_THROWS_AS(sweep_and_classify(g, fam, kEG, 1.0, few), ValidationError);
  std::vector<double> bad = grid;
  std::swap(bad[3], bad[4]);
  CHECK_THROWS_AS(sweep_and_classify(g, fam, kEG, 1.0, bad), ValidationError);
  CHECK(to_string(Regime::AntiZeno) == "anti-zeno");
}
