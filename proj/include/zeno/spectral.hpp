#pragma once

// Frequency-domain view of the jump rate for time-independent V:
//
//   R = 2 pi int G(w) P(w) dw
//   P(w) = (1/pi) Re int_0^tau (1 - u/tau) F(u) e^{i (w - w_if) u} du
//
// G is the reservoir coupling spectrum as a function of the reservoir
// excitation energy and w_if = E_i - E_f.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/measurement.hpp"

namespace zeno {

enum class SpectrumKind { Lorentzian, DoubleLorentzian, FlatWindow, Tabulated };

std::string to_string(SpectrumKind k);

struct LorentzianPeak {
  double center = 0.0;
  double half_width = 1.0;
  /// Integrated strength int G dw.
  double strength = 1.0;
  bool operator==(const LorentzianPeak&) const = default;
};

class ReservoirSpectrum {
 public:
  static ReservoirSpectrum lorentzian(double center, double half_width, double strength);
  static ReservoirSpectrum double_lorentzian(LorentzianPeak a, LorentzianPeak b);
  /// Constant level strength / (hi - lo) on [lo, hi].
  static ReservoirSpectrum flat_window(double lo, double hi, double strength);
  /// Linear interpolation of samples, zero outside the table.
  static ReservoirSpectrum tabulated(std::vector<double> omega, std::vector<double> values);
  /// A single discrete channel of weight |V|^2 at omega, as a window of
  /// width 1e-6 * scale.
  static ReservoirSpectrum delta_channel(double omega, double weight, double scale);

  SpectrumKind kind() const { return kind_; }
  double operator()(double omega) const;
  double strength() const { return strength_; }
  const std::vector<LorentzianPeak>& peaks() const { return peaks_; }
  double window_lo() const { return lo_; }
  double window_hi() const { return hi_; }
  const std::vector<double>& table_omega() const { return table_w_; }
  const std::vector<double>& table_values() const { return table_g_; }

  /// Whether G vanishes outside [window_lo, window_hi].
  bool bounded() const { return kind_ == SpectrumKind::FlatWindow || kind_ == SpectrumKind::Tabulated; }
  /// Interval holding all but a 1e-12 relative share of G: the support for
  /// bounded kinds, peaks out to G < 1e-12 peak otherwise.
  std::pair<double, double> effective_support() const;
  /// Points where G or its derivative changes character.
  std::vector<double> breakpoints() const;

  bool operator==(const ReservoirSpectrum&) const = default;

 private:
  ReservoirSpectrum() = default;
  void check_strength() const;

  SpectrumKind kind_ = SpectrumKind::Lorentzian;
  std::vector<LorentzianPeak> peaks_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> table_w_, table_g_;
  double strength_ = 0.0;
};

double spectrum_eval(const ReservoirSpectrum& g, double omega);

class BroadeningProfile {
 public:
  double operator()(double omega) const;

  double omega_if() const { return omega_if_; }
  double tau() const { return tau_; }
  const std::string& source() const { return source_; }
  bool interchange_valid() const { return interchange_; }

  /// Half-width of the window around omega_if evaluated by quadrature;
  /// outside it P is replaced by its large-detuning expansion.
  double cutoff() const { return cutoff_; }
  /// int P dw: quadrature inside the cutoff plus the analytic tail.
  double normalization() const;
  /// Suggested quadrature breakpoints inside the cutoff window.
  std::vector<double> breakpoints() const;

  friend BroadeningProfile broadening_profile(const MeasurementModel& model, const LevelPair& pair,
                                              double omega_if, double tau);
  friend BroadeningProfile sinc_profile(double omega_if, double tau);

 private:
  BroadeningProfile() = default;
  double central(double delta) const;
  double tail(double delta) const;
  double tail_integral() const;

  double omega_if_ = 0.0, tau_ = 1.0;
  std::string source_;
  bool interchange_ = true;
  bool analytic_ = false;
  double cutoff_ = 0.0;
  std::vector<double> u_;
  std::vector<cplx> g_;  // quadrature weight * (1 - u/tau) * F(u)
  // Derivatives of g(u) = (1 - u/tau) F(u) at 0 and tau, orders 0..3.
  std::array<cplx, 4> d0_{}, dtau_{};
};

/// P built from the model's decoherence function of `pair` (initial, final).
/// Throws AssumptionError when the model's kernels do not commute.
BroadeningProfile broadening_profile(const MeasurementModel& model, const LevelPair& pair, double omega_if,
                                     double tau);

/// 2 sin^2(tau d / 2) / (pi tau d^2), d = omega - omega_if.
BroadeningProfile sinc_profile(double omega_if, double tau);

/// R = 2 pi int G P dw.
double overlap_decay_rate(const ReservoirSpectrum& g, const BroadeningProfile& p);

enum class Regime { Zeno, AntiZeno, Neutral };

std::string to_string(Regime r);

struct RegimeCurve {
  std::vector<double> tau;
  std::vector<double> rate;
  double rate_golden_rule = 0.0;
  /// Label of (tau[k], tau[k+1]) from R[k] - R[k+1].
  std::vector<Regime> intervals;
  /// R[k] > rate_golden_rule.
  std::vector<bool> above_golden_rule;

  /// Per-point label: the interval (k, k+1) reached by shrinking tau to
  /// tau[k]; the last point reuses the final interval.
  Regime point_label(std::size_t k) const;
};

using ModelFamily = std::function<MeasurementModel(double tau)>;

RegimeCurve sweep_and_classify(const ReservoirSpectrum& g, const ModelFamily& family, const LevelPair& pair,
                               double omega_if, std::span<const double> tau_grid, unsigned threads = 0);

}  // namespace zeno
