#pragma once

// Brute-force reference: the full system (x) reservoir-mode (x) detector
// density matrix propagated under H0 + V + H_I with the detector
// dissipators, no perturbative expansion.

#include <string>
#include <vector>

#include "zeno/jump.hpp"
#include "zeno/linalg.hpp"
#include "zeno/measurement.hpp"
#include "zeno/spectral.hpp"
#include "zeno/system.hpp"

namespace zeno {

struct CompositeScenario {
  SystemSpec sys;
  TransitionOperator coupling;
  MeasurementModel model;
  MeasurementSchedule schedule;

  std::size_t dim() const { return sys.num_states() * model.detector_dim(); }
  /// Dimension cap, constant coupling, Hermitian V, detector built for sys.
  void validate() const;
  CompositeScenario with_coupling(const TransitionOperator& v) const;
};

/// Decaying-system scenario: levels "e" (energy omega_if) and "g" (0),
/// channel "vac" plus `modes` channels uniformly spaced over [lo, hi] with
/// <g, k|V|e, vac> = sqrt(G(w_k) dw).
CompositeScenario make_decay_scenario(const ReservoirSpectrum& spectrum, double omega_if, int modes, double lo,
                                      double hi, const MeasurementModel& model, const MeasurementSchedule& schedule);

struct ExactRun {
  /// System (x) detector state after the last cycle.
  Matrix rho;
  /// Largest |Tr rho - 1| seen at any segment boundary.
  double max_trace_drift = 0.0;
  /// Smallest eigenvalue of the Hermitian part seen at any boundary.
  double min_eigenvalue = 0.0;
};

/// Propagates |initial><initial| (x) rho_D(0) through `cycles` schedule cycles.
ExactRun exact_evolve(const CompositeScenario& sc, State initial, int cycles = 1);

/// Tr{|f><f| rho(tau)} after one cycle.
double exact_jump_probability(const CompositeScenario& sc, State initial, State final_state);
/// Sum of exact_jump_probability over every channel of `final_level`.
double exact_level_probability(const CompositeScenario& sc, State initial, std::size_t final_level);

struct ConvergenceFit {
  std::vector<double> scales;
  std::vector<double> w_exact;
  std::vector<double> w_formula;
  std::vector<double> errors;
  /// Least-squares slope of log E against log s.
  double exponent = 0.0;
  /// RMS residual of that fit in log space.
  double residual = 0.0;
  /// Same slope for W_formula itself; 2 by bilinearity.
  double formula_exponent = 0.0;
};

ConvergenceFit convergence_fit(const CompositeScenario& sc, State initial, State final_state,
                               const std::vector<double>& scale_factors, const QuadratureOptions& opts = {});

/// 2 pi G(omega_if).
double golden_rule_rate(const ReservoirSpectrum& g, double omega_if);

struct NamedScenario {
  std::string name;
  CompositeScenario scenario;
  State initial;
  State final_state;
};

/// Resonant and detuned reservoirs under projective and dephasing models.
std::vector<NamedScenario> canonical_scenarios();

}  // namespace zeno
