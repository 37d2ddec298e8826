#include "zeno/jump.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "zeno/errors.hpp"
#include "zeno/quadrature.hpp"

namespace zeno {

namespace {

constexpr int kOrder = 8;
const cplx kI(0.0, 1.0);

using Integrand = std::function<cplx(double, double)>;

int panels_for(int grid) { return std::max(1, grid / kOrder); }

// int_a^b dt1 int_a^t1 dt2 f(t1, t2)
cplx integrate_triangle(double a, double b, int grid, const Integrand& f) {
  if (b <= a) return 0.0;
  const int panels = panels_for(grid);
  const quad::Rule outer = quad::composite_gauss(a, b, panels, kOrder);
  cplx sum = 0.0;
  for (std::size_t p = 0; p < outer.nodes.size(); ++p) {
    const double t1 = outer.nodes[p];
    const quad::Rule inner = quad::composite_gauss(a, t1, panels, kOrder);
    cplx row = 0.0;
    for (std::size_t q = 0; q < inner.nodes.size(); ++q) row += inner.weights[q] * f(t1, inner.nodes[q]);
    sum += outer.weights[p] * row;
  }
  return sum;
}

// int_a1^b1 dt1 int_a2^b2 dt2 f(t1, t2)
cplx integrate_rectangle(double a1, double b1, double a2, double b2, int grid, const Integrand& f) {
  if (b1 <= a1 || b2 <= a2) return 0.0;
  const int panels = panels_for(grid);
  const quad::Rule r1 = quad::composite_gauss(a1, b1, panels, kOrder);
  const quad::Rule r2 = quad::composite_gauss(a2, b2, panels, kOrder);
  cplx sum = 0.0;
  for (std::size_t p = 0; p < r1.nodes.size(); ++p) {
    cplx row = 0.0;
    for (std::size_t q = 0; q < r2.nodes.size(); ++q) row += r2.weights[q] * f(r1.nodes[p], r2.nodes[q]);
    sum += r1.weights[p] * row;
  }
  return sum;
}

// Tr{ K_pair(u_pair) K_diag(u_diag) rho_D(0) } for one (initial, final) pair.
class TraceEvaluator {
 public:
  TraceEvaluator(const MeasurementModel& model, State initial, State final_state)
      : model_(model),
        forward_{initial, final_state},
        backward_{final_state, initial},
        diag_{initial, initial},
        scalar_(model.detector_dim() == 1),
        d_(static_cast<Eigen::Index>(model.detector_dim())),
        rho_(vec(model.rho_d0().matrix())) {}

  const LevelPair& forward() const { return forward_; }
  const LevelPair& backward() const { return backward_; }

  cplx operator()(const LevelPair& pair, double u_pair, double u_diag) const {
    if (scalar_) return model_.scalar_kernel(pair, u_pair) * model_.scalar_kernel(diag_, u_diag);
    const Vector y = model_.kernel(diag_, u_diag) * rho_;
    const Vector z = model_.kernel(pair, u_pair) * y;
    cplx tr = 0.0;
    for (Eigen::Index k = 0; k < d_; ++k) tr += z(k * d_ + k);
    return tr;
  }

 private:
  const MeasurementModel& model_;
  LevelPair forward_, backward_, diag_;
  bool scalar_;
  Eigen::Index d_;
  Vector rho_;
};

struct Couplings {
  cplx v_fi;  // static V_{f,i}
  cplx v_if;
  Envelope env;
  double omega;  // omega_{f,i}
  double scale;  // |V_fi| * tau, for absolute tolerance floors
};

Couplings couplings_for(const SystemSpec& sys, const TransitionOperator& v, State initial, State final_state,
                        double tau) {
  sys.check(initial);
  sys.check(final_state);
  if (initial.level == final_state.level)
    throw ValidationError("jump probability needs distinct initial and final levels");
  v.validate(sys);
  Couplings c{v.element(final_state, initial), v.element(initial, final_state), v.envelope(),
              sys.omega(final_state, initial), 0.0};
  c.scale = std::abs(c.v_fi) * tau;
  return c;
}

// Runs `eval(grid)` at grid and grid/2, doubling until they agree.
template <typename Eval>
JumpIntegral converge(const Eval& eval, const QuadratureOptions& opts, double scale) {
  if (opts.grid < 2 * kOrder || opts.grid % kOrder != 0)
    throw ValidationError("quadrature grid must be a multiple of 8 and at least 16");
  int grid = opts.grid;
  cplx coarse = eval(grid / 2);
  double delta = 0.0;
  while (true) {
    const cplx fine = eval(grid);
    delta = std::abs(fine.real() - coarse.real());
    const double floor = 1e-15 * scale * scale;
    if (delta <= opts.rel_tol * std::abs(fine.real()) + floor) {
      return {fine.real(), std::abs(fine.imag()), grid, delta};
    }
    if (2 * grid > opts.max_grid)
      throw NumericsError("jump probability quadrature did not converge at grid " + std::to_string(grid),
                          delta / std::max(std::abs(fine.real()), 1e-300));
    coarse = fine;
    grid *= 2;
  }
}

}  // namespace

JumpIntegral composite_jump_integral(const SystemSpec& sys, const TransitionOperator& v,
                                     const MeasurementModel& model, const MeasurementSchedule& schedule,
                                     State initial, State final_state, const QuadratureOptions& opts) {
  schedule.validate();
  const double tau = schedule.tau, tau_f = schedule.tau_f;
  const Couplings c = couplings_for(sys, v, initial, final_state, tau);
  if (c.v_fi == 0.0) return {0.0, 0.0, opts.grid, 0.0};
  const TraceEvaluator tr(model, initial, final_state);

  // Composite kernel cases: free before tau_f, measurement after, and the
  // measurement kernel started at tau_f when the interval straddles it.
  auto composite = [&](const LevelPair& pair, double t1, double t2) -> cplx {
    if (t1 <= tau_f) return tr(pair, 0.0, 0.0);
    if (t2 >= tau_f) return tr(pair, t1 - t2, t2 - tau_f);
    return tr(pair, t1 - tau_f, 0.0);
  };
  const Integrand f = [&](double t1, double t2) -> cplx {
    const double u = t1 - t2;
    const cplx a = c.env(t1) * c.v_fi * c.env(t2) * c.v_if * std::exp(kI * c.omega * u) *
                   composite(tr.forward(), t1, t2);
    const cplx b = c.env(t2) * c.v_fi * c.env(t1) * c.v_if * std::exp(-kI * c.omega * u) *
                   composite(tr.backward(), t1, t2);
    return a + b;
  };
  auto eval = [&](int grid) {
    return integrate_triangle(0.0, tau_f, grid, f) + integrate_rectangle(tau_f, tau, 0.0, tau_f, grid, f) +
           integrate_triangle(tau_f, tau, grid, f);
  };
  return converge(eval, opts, c.scale);
}

JumpIntegral jump_integral(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                           State initial, State final_state, double tau, const QuadratureOptions& opts) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  return composite_jump_integral(sys, v, model, MeasurementSchedule{tau, 0.0, 1}, initial, final_state, opts);
}

double jump_probability(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                        State initial, State final_state, double tau, const QuadratureOptions& opts) {
  return jump_integral(sys, v, model, initial, final_state, tau, opts).value;
}

JumpResult pulsed_jump_probability(const SystemSpec& sys, const TransitionOperator& v,
                                   const MeasurementModel& model, const MeasurementSchedule& schedule,
                                   State initial, State final_state, const QuadratureOptions& opts) {
  const JumpIntegral total = composite_jump_integral(sys, v, model, schedule, initial, final_state, opts);
  const double tau = schedule.tau, tau_f = schedule.tau_f;
  const Couplings c = couplings_for(sys, v, initial, final_state, tau);
  JumpResult r;
  r.w_total = total.value;
  r.imag_residue = total.imag_residue;
  if (c.v_fi != 0.0) {
    const int grid = total.grid;
    const TraceEvaluator tr(model, initial, final_state);

    // Free evolution: |int_0^tau_f V_fi(t) e^{i w t} dt|^2.
    if (tau_f > 0.0) {
      const quad::Rule rule = quad::composite_gauss(0.0, tau_f, panels_for(grid), kOrder);
      cplx amp = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = rule.nodes[k];
        amp += rule.weights[k] * c.env(t) * std::exp(kI * c.omega * t);
      }
      r.w_f = std::norm(c.v_fi * amp);
    }

    // Measurement: both times inside the measurement window.
    const Integrand fm = [&](double t1, double t2) -> cplx {
      const double u = t1 - t2;
      return c.env(t1) * c.v_fi * c.env(t2) * c.v_if *
             (std::exp(kI * c.omega * u) * tr(tr.forward(), u, t2 - tau_f) +
              std::exp(-kI * c.omega * u) * tr(tr.backward(), u, t2 - tau_f));
    };
    const cplx wm = integrate_triangle(tau_f, tau, grid, fm);

    // Interference: t2 in the free window, t1 in the measurement window.
    const Integrand fi = [&](double t1, double t2) -> cplx {
      const double u = t1 - t2;
      return c.env(t1) * c.v_fi * c.env(t2) * c.v_if *
             (std::exp(kI * c.omega * u) * model.decoherence_function(tr.forward(), t1 - tau_f) +
              std::exp(-kI * c.omega * u) * model.decoherence_function(tr.backward(), t1 - tau_f));
    };
    const cplx wi = integrate_rectangle(tau_f, tau, 0.0, tau_f, grid, fi);

    r.w_m = wm.real();
    r.w_i = wi.real();
    r.imag_residue = std::max({r.imag_residue, std::abs(wm.imag()), std::abs(wi.imag())});
  }
  r.rate = r.w_total / tau;
  r.survival = survival(r.rate, schedule);
  return r;
}

double FirstOrderState::population(State s) const {
  // Every block pairs the initial state with a different state, so no
  // block lies on the diagonal |s><s|.
  double p = 0.0;
  for (const auto& b : blocks)
    if (b.other == s && s == initial) p += b.ket_block.trace().real();
  return p;
}

FirstOrderState first_order_state(const SystemSpec& sys, const TransitionOperator& v, const MeasurementModel& model,
                                  State initial, double t, const QuadratureOptions& opts) {
  sys.check(initial);
  v.validate(sys);
  if (!(t >= 0.0)) throw ValidationError("first-order state needs t >= 0");
  FirstOrderState out{initial, {}};
  const auto d = static_cast<Eigen::Index>(model.detector_dim());
  const Vector rho = vec(model.rho_d0().matrix());
  const LevelPair diag{initial, initial};
  const quad::Rule rule = quad::composite_gauss(0.0, t, panels_for(opts.grid), kOrder);

  for (const auto& [key, amp] : v.entries()) {
    if (key.second != initial) continue;
    const State p = key.first;
    const LevelPair ket_pair{p, initial};
    const LevelPair bra_pair{initial, p};
    Vector ket = Vector::Zero(d * d);
    Vector bra = Vector::Zero(d * d);
    const double w_ip = sys.omega(initial, p);
    for (std::size_t k = 0; t > 0.0 && k < rule.nodes.size(); ++k) {
      const double t2 = rule.nodes[k];
      const double env = v.envelope()(t2);
      const Vector y = model.kernel(diag, t2) * rho;
      ket += (rule.weights[k] * env * std::exp(kI * w_ip * (t - t2))) * (model.kernel(ket_pair, t - t2) * y);
      bra += (rule.weights[k] * env * std::exp(-kI * w_ip * (t - t2))) * (model.kernel(bra_pair, t - t2) * y);
    }
    // (1/i) V_pi ... and -(1/i) V_ip ...
    ket *= -kI * v.element(p, initial);
    bra *= kI * v.element(initial, p);
    out.blocks.push_back({p, unvec(ket, d), unvec(bra, d)});
  }
  return out;
}

double decay_rate(std::span<const double> probabilities, double tau) {
  if (probabilities.empty()) throw ValidationError("decay rate needs at least one probability");
  if (!(tau > 0.0)) throw ValidationError("decay rate needs tau > 0");
  double sum = 0.0;
  for (double w : probabilities) {
    if (w < -1e-10) throw ValidationError("jump probabilities must be non-negative");
    sum += w;
  }
  return sum / tau;
}

double survival(double rate, const MeasurementSchedule& schedule) {
  if (rate < 0.0) throw ValidationError("rate must be non-negative");
  return std::clamp(std::exp(-rate * schedule.n_repeats * schedule.tau), 0.0, 1.0);
}

double survival_power(double total_probability, int n) {
  return std::clamp(std::pow(std::clamp(1.0 - total_probability, 0.0, 1.0), n), 0.0, 1.0);
}

}  // namespace zeno
