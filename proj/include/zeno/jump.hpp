#pragma once

// Second-order jump probabilities of a repeatedly measured system.
//
// For the initial state |i alpha><i alpha| (x) rho_D(0) the probability of
// ending in |f alpha'> after one cycle of length tau is
//
//   W = int_0^tau dt1 int_0^t1 dt2 Tr{ [ V_fi(t1) V_if(t2) S_if(t1,t2) e^{i w (t1-t2)}
//                                      + V_fi(t2) V_if(t1) S_fi(t1,t2) e^{-i w (t1-t2)} ]
//                                    S_ii(t2,0) rho_D(0) }
//
// with w = E_f + E_alpha' - E_i - E_alpha. The two terms are complex
// conjugates for Hermitian V, so W is real; both are evaluated and the
// imaginary residue is reported.

#include <span>
#include <vector>

#include "zeno/measurement.hpp"
#include "zeno/system.hpp"

namespace zeno {

struct QuadratureOptions {
  /// Gauss nodes per time axis; a multiple of 8.
  int grid = 128;
  /// Relative change allowed between grid and grid/2.
  double rel_tol = 1e-8;
  /// Largest grid tried before giving up.
  int max_grid = 2048;
};

struct JumpIntegral {
  double value = 0.0;
  double imag_residue = 0.0;
  int grid = 0;
  /// |W(grid) - W(grid/2)|.
  double richardson_delta = 0.0;
};

struct JumpResult {
  double w_total = 0.0;
  double w_m = 0.0;
  double w_f = 0.0;
  double w_i = 0.0;
  /// w_total / tau.
  double rate = 0.0;
  /// exp(-rate * n_repeats * tau).
  double survival = 1.0;
  double imag_residue = 0.0;
};

/// W(initial -> final) for one continuous measurement of length tau.
JumpIntegral jump_integral(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                           State initial, State final_state, double tau, const QuadratureOptions& opts = {});

double jump_probability(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                        State initial, State final_state, double tau, const QuadratureOptions& opts = {});

/// W with the free/measurement composite kernel, integrated over the whole
/// triangle with the case boundary at tau_f as a mesh line.
JumpIntegral composite_jump_integral(const SystemSpec& sys, const TransitionOperator& v,
                                     const MeasurementModel& model, const MeasurementSchedule& schedule,
                                     State initial, State final_state, const QuadratureOptions& opts = {});

/// W_F, W_M, W_I evaluated separately; w_total is the composite integral.
JumpResult pulsed_jump_probability(const SystemSpec& sys, const TransitionOperator& v,
                                   const MeasurementModel& model, const MeasurementSchedule& schedule,
                                   State initial, State final_state, const QuadratureOptions& opts = {});

/// First-order density-matrix blocks coupling the initial state to `other`.
struct FirstOrderBlock {
  State other;
  /// Detector matrix of the |other><initial| block.
  Matrix ket_block;
  /// Detector matrix of the |initial><other| block.
  Matrix bra_block;
};

struct FirstOrderState {
  State initial;
  std::vector<FirstOrderBlock> blocks;

  /// Tr{|s><s| rho1}; rho1 has no diagonal blocks, so zero for every s.
  double population(State s) const;
};

FirstOrderState first_order_state(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                                  State initial, double t, const QuadratureOptions& opts = {});

/// R = (1/tau) sum W.
double decay_rate(std::span<const double> probabilities, double tau);

/// exp(-R N tau), clamped to [0, 1].
double survival(double rate, const MeasurementSchedule& schedule);

/// (1 - sum W)^n, clamped to [0, 1].
double survival_power(double total_probability, int n);

}  // namespace zeno
