#include "zeno/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"
#include "zeno/quadrature.hpp"

namespace zeno {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kProfileOrder = 16;
// Phase advance of e^{i d u} across one Gauss panel at the cutoff.
constexpr double kPanelPhase = 4.0;
constexpr int kCentralPieces = 64;

double lorentz(const LorentzianPeak& p, double w) {
  const double d = w - p.center;
  return p.strength / kPi * p.half_width / (d * d + p.half_width * p.half_width);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ValidationError(std::string("spectrum ") + what + " must be finite");
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::Lorentzian:
      return "lorentzian";
    case SpectrumKind::DoubleLorentzian:
      return "double_lorentzian";
    case SpectrumKind::FlatWindow:
      return "flat_window";
    case SpectrumKind::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Zeno:
      return "zeno";
    case Regime::AntiZeno:
      return "anti-zeno";
    case Regime::Neutral:
      return "neutral";
  }
  return "unknown";
}

ReservoirSpectrum ReservoirSpectrum::lorentzian(double center, double half_width, double strength) {
  require_finite(center, "center");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("Lorentzian half-width must be positive");
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw ValidationError("spectrum strength must be >= 0");
  ReservoirSpectrum s;
  s.kind_ = SpectrumKind::Lorentzian;
  s.peaks_ = {{center, half_width, strength}};
  s.strength_ = strength;
  s.check_strength();
  return s;
}

ReservoirSpectrum ReservoirSpectrum::double_lorentzian(LorentzianPeak a, LorentzianPeak b) {
  for (const auto& p : {a, b}) {
    require_finite(p.center, "center");
    if (!(p.half_width > 0.0) || !std::isfinite(p.half_width))
      throw ValidationError("Lorentzian half-width must be positive");
    if (!(p.strength >= 0.0) || !std::isfinite(p.strength)) throw ValidationError("spectrum strength must be >= 0");
  }
  ReservoirSpectrum s;
  s.kind_ = SpectrumKind::DoubleLorentzian;
  s.peaks_ = {a, b};
  s.strength_ = a.strength + b.strength;
  s.check_strength();
  return s;
}

ReservoirSpectrum ReservoirSpectrum::flat_window(double lo, double hi, double strength) {
  require_finite(lo, "window edge");
  require_finite(hi, "window edge");
  if (!(hi > lo)) throw ValidationError("flat window needs lo < hi");
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw ValidationError("spectrum strength must be >= 0");
  ReservoirSpectrum s;
  s.kind_ = SpectrumKind::FlatWindow;
  s.lo_ = lo;
  s.hi_ = hi;
  s.strength_ = strength;
  s.check_strength();
  return s;
}

ReservoirSpectrum ReservoirSpectrum::tabulated(std::vector<double> omega, std::vector<double> values) {
  if (omega.size() < 2 || omega.size() != values.size())
    throw ValidationError("tabulated spectrum needs at least two (omega, value) samples");
  for (std::size_t k = 0; k < omega.size(); ++k) {
    require_finite(omega[k], "table frequency");
    if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
      throw ValidationError("tabulated spectrum values must be finite and >= 0");
    if (k > 0 && !(omega[k] > omega[k - 1]))
      throw ValidationError("tabulated spectrum frequencies must be strictly increasing");
  }
  ReservoirSpectrum s;
  s.kind_ = SpectrumKind::Tabulated;
  s.lo_ = omega.front();
  s.hi_ = omega.back();
  double total = 0.0;
  for (std::size_t k = 1; k < omega.size(); ++k) total += 0.5 * (values[k] + values[k - 1]) * (omega[k] - omega[k - 1]);
  s.table_w_ = std::move(omega);
  s.table_g_ = std::move(values);
  s.strength_ = total;
  s.check_strength();
  return s;
}

ReservoirSpectrum ReservoirSpectrum::delta_channel(double omega, double weight, double scale) {
  if (!(scale > 0.0)) throw ValidationError("delta channel scale must be positive");
  const double half = 0.5e-6 * scale;
  return flat_window(omega - half, omega + half, weight);
}

double ReservoirSpectrum::operator()(double w) const {
  switch (kind_) {
    case SpectrumKind::Lorentzian:
    case SpectrumKind::DoubleLorentzian: {
      double g = 0.0;
      for (const auto& p : peaks_) g += lorentz(p, w);
      return g;
    }
    case SpectrumKind::FlatWindow:
      return (w >= lo_ && w <= hi_) ? strength_ / (hi_ - lo_) : 0.0;
    case SpectrumKind::Tabulated: {
      if (w < lo_ || w > hi_) return 0.0;
      const auto it = std::upper_bound(table_w_.begin(), table_w_.end(), w);
      if (it == table_w_.end()) return table_g_.back();
      const std::size_t k = static_cast<std::size_t>(it - table_w_.begin());
      const double s = (w - table_w_[k - 1]) / (table_w_[k] - table_w_[k - 1]);
      return (1.0 - s) * table_g_[k - 1] + s * table_g_[k];
    }
  }
  return 0.0;
}

double spectrum_eval(const ReservoirSpectrum& g, double omega) { return g(omega); }

std::pair<double, double> ReservoirSpectrum::effective_support() const {
  if (bounded()) return {lo_, hi_};
  double lo = kInf, hi = -kInf;
  for (const auto& p : peaks_) {
    lo = std::min(lo, p.center - 1e6 * p.half_width);
    hi = std::max(hi, p.center + 1e6 * p.half_width);
  }
  return {lo, hi};
}

std::vector<double> ReservoirSpectrum::breakpoints() const {
  std::vector<double> b;
  switch (kind_) {
    case SpectrumKind::Lorentzian:
    case SpectrumKind::DoubleLorentzian:
      for (const auto& p : peaks_) {
        b.push_back(p.center);
        for (double r = p.half_width; r <= 1e6 * p.half_width; r *= 4.0) {
          b.push_back(p.center - r);
          b.push_back(p.center + r);
        }
      }
      break;
    case SpectrumKind::FlatWindow:
      b = {lo_, hi_};
      break;
    case SpectrumKind::Tabulated:
      b = table_w_;
      break;
  }
  return sorted_unique(std::move(b));
}

void ReservoirSpectrum::check_strength() const {
  if (strength_ == 0.0) return;
  std::vector<double> b = breakpoints();
  if (!bounded()) {
    b.insert(b.begin(), -kInf);
    b.push_back(kInf);
  }
  const auto f = [this](double w) { return (*this)(w); };
  const quad::Result r = quad::integrate(f, b, {1e-14 * strength_, 1e-9, 20000});
  if (std::abs(r.value - strength_) > 1e-6 * strength_)
    throw ValidationError("spectrum integral " + std::to_string(r.value) + " differs from declared strength " +
                          std::to_string(strength_));
}

// ---------------------------------------------------------------------------

BroadeningProfile sinc_profile(double omega_if, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("sinc profile tau must be positive");
  require_finite(omega_if, "transition frequency");
  BroadeningProfile p;
  p.omega_if_ = omega_if;
  p.tau_ = tau;
  p.source_ = "sinc";
  p.analytic_ = true;
  p.cutoff_ = 50.0 * kPi / tau;
  p.d0_ = {1.0, -1.0 / tau, 0.0, 0.0};
  p.dtau_ = {0.0, -1.0 / tau, 0.0, 0.0};
  return p;
}

BroadeningProfile broadening_profile(const MeasurementModel& model, const LevelPair& pair, double omega_if,
                                     double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("profile tau must be positive");
  require_finite(omega_if, "transition frequency");
  if (pair.diagonal()) throw ValidationError("broadening profile needs distinct levels");
  if (!model.interchange_valid(pair))
    throw AssumptionError(
        "broadening profile assumes the detector kernels of the level pair commute; they do not for this model");

  BroadeningProfile p;
  p.omega_if_ = omega_if;
  p.tau_ = tau;
  p.source_ = to_string(model.kind());
  p.interchange_ = true;

  const double kappa = model.rate_scale(pair);
  p.cutoff_ = 50.0 * kPi / tau + 20.0 * kappa;

  const int panels = std::max(8, static_cast<int>(std::ceil(p.cutoff_ * tau / kPanelPhase)));
  const quad::Rule rule = quad::composite_gauss(0.0, tau, panels, kProfileOrder);
  p.u_ = rule.nodes;
  p.g_.resize(rule.nodes.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double u = rule.nodes[k];
    p.g_[k] = rule.weights[k] * (1.0 - u / tau) * model.decoherence_function(pair, u);
    peak = std::max(peak, std::abs(p.g_[k]));
  }
  std::size_t keep = p.g_.size();
  while (keep > 0 && std::abs(p.g_[keep - 1]) < 1e-17 * peak) --keep;
  p.u_.resize(keep);
  p.g_.resize(keep);

  // F^(n)(u) = Tr{L^n S(u) rho_D}; g^(n) = (1 - u/tau) F^(n) - (n/tau) F^(n-1).
  const Matrix gen = model.pair_generator(pair.left.level, pair.right.level);
  const auto d = static_cast<Eigen::Index>(model.detector_dim());
  auto derivatives = [&](double u) {
    std::array<cplx, 4> f{};
    Vector x = model.kernel(pair, u) * vec(model.rho_d0().matrix());
    for (int n = 0; n < 4; ++n) {
      f[n] = unvec(x, d).trace();
      x = gen * x;
    }
    std::array<cplx, 4> g{};
    for (int n = 0; n < 4; ++n) g[n] = (1.0 - u / tau) * f[n] - (n > 0 ? n / tau * f[n - 1] : 0.0);
    return g;
  };
  p.d0_ = derivatives(0.0);
  p.dtau_ = derivatives(tau);
  return p;
}

double BroadeningProfile::central(double delta) const {
  if (analytic_) {
    const double x = tau_ * delta;
    if (std::abs(x) < 1e-4) return tau_ / kPi * (0.5 - x * x / 24.0 + x * x * x * x / 720.0);
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s / (kPi * tau_ * delta * delta);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < u_.size(); ++k) {
    const double ph = delta * u_[k];
    acc += g_[k].real() * std::cos(ph) - g_[k].imag() * std::sin(ph);
  }
  return acc / kPi;
}

// Repeated integration by parts of int_0^tau g(u) e^{i d u} du.
double BroadeningProfile::tail(double delta) const {
  const cplx id(0.0, delta);
  const cplx e = std::exp(id * tau_);
  cplx sum = 0.0, pw = id;
  double sign = 1.0;
  for (int n = 0; n < 4; ++n) {
    sum += sign * (dtau_[n] * e - d0_[n]) / pw;
    pw *= id;
    sign = -sign;
  }
  return sum.real() / kPi;
}

double BroadeningProfile::operator()(double omega) const {
  const double delta = omega - omega_if_;
  if (analytic_ || std::abs(delta) <= cutoff_) return central(delta);
  return tail(delta);
}

// int over |d| > cutoff of the tail expansion, both sides; the oscillating
// part keeps only its leading 1/cutoff^2 term.
double BroadeningProfile::tail_integral() const {
  const double c = cutoff_;
  const double steady = -2.0 * d0_[1].real() / c + 2.0 * d0_[3].real() / (3.0 * c * c * c);
  const double wave = -2.0 * dtau_[1].real() * std::sin(c * tau_) / (tau_ * c * c);
  return (steady + wave) / kPi;
}

std::vector<double> BroadeningProfile::breakpoints() const {
  std::vector<double> b;
  b.reserve(kCentralPieces + 1);
  for (int k = 0; k <= kCentralPieces; ++k)
    b.push_back(omega_if_ - cutoff_ + 2.0 * cutoff_ * k / kCentralPieces);
  return b;
}

double BroadeningProfile::normalization() const {
  const auto f = [this](double w) { return central(w - omega_if_); };
  const quad::Result r = quad::integrate(f, breakpoints(), {1e-13, 1e-11, 20000});
  return r.value + tail_integral();
}

double overlap_decay_rate(const ReservoirSpectrum& g, const BroadeningProfile& p) {
  if (g.strength() == 0.0) return 0.0;
  std::vector<double> b = p.breakpoints();
  for (int k = 1; k <= 8; ++k) {
    const double r = p.cutoff() * std::ldexp(1.0, k);
    b.push_back(p.omega_if() - r);
    b.push_back(p.omega_if() + r);
  }
  const std::vector<double> gb = g.breakpoints();
  b.insert(b.end(), gb.begin(), gb.end());
  if (g.bounded()) {
    std::erase_if(b, [&](double w) { return w < g.window_lo() || w > g.window_hi(); });
    b.push_back(g.window_lo());
    b.push_back(g.window_hi());
  } else {
    b.push_back(-kInf);
    b.push_back(kInf);
  }
  b = sorted_unique(std::move(b));

  const auto f = [&](double w) { return g(w) * p(w); };
  const double scale = g.strength() * p.tau() / (2.0 * kPi);
  const quad::Result r = quad::integrate(f, b, {1e-13 * scale, 1e-9, 50000});
  return std::max(0.0, 2.0 * kPi * r.value);
}

// ---------------------------------------------------------------------------

Regime RegimeCurve::point_label(std::size_t k) const {
  if (intervals.empty()) return Regime::Neutral;
  return intervals[std::min(k, intervals.size() - 1)];
}

RegimeCurve sweep_and_classify(const ReservoirSpectrum& g, const ModelFamily& family, const LevelPair& pair,
                               double omega_if, std::span<const double> tau_grid, unsigned threads) {
  if (tau_grid.size() < 8) throw ValidationError("tau sweep needs at least 8 points");
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    if (!(tau_grid[k] > 0.0) || !std::isfinite(tau_grid[k])) throw ValidationError("sweep tau values must be positive");
    if (k > 0 && !(tau_grid[k] > tau_grid[k - 1])) throw ValidationError("sweep tau grid must be strictly increasing");
  }
  RegimeCurve c;
  c.tau.assign(tau_grid.begin(), tau_grid.end());
  c.rate.assign(c.tau.size(), 0.0);
  c.rate_golden_rule = 2.0 * kPi * g(omega_if);
  parallel_for(c.tau.size(), threads, [&](std::size_t k) {
    const MeasurementModel m = family(c.tau[k]);
    c.rate[k] = overlap_decay_rate(g, broadening_profile(m, pair, omega_if, c.tau[k]));
  });
  for (std::size_t k = 0; k + 1 < c.tau.size(); ++k) {
    const double d = c.rate[k] - c.rate[k + 1];
    c.intervals.push_back(d < -1e-12 ? Regime::Zeno : d > 1e-12 ? Regime::AntiZeno : Regime::Neutral);
  }
  for (double r : c.rate) c.above_golden_rule.push_back(r > c.rate_golden_rule);
  return c;
}

}  // namespace zeno
