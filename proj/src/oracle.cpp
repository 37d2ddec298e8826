#include "zeno/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

// Least-squares slope and RMS residual of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (icept + slope * x[k]);
    ss += r * r;
  }
  return {slope, std::sqrt(ss / n)};
}

Matrix level_projector(const SystemSpec& sys, std::size_t level) {
  const auto n = static_cast<Eigen::Index>(sys.num_states());
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t c = 0; c < sys.num_channels(); ++c) {
    const auto k = static_cast<Eigen::Index>(sys.flat({level, c}));
    p(k, k) = 1.0;
  }
  return p;
}

struct Generators {
  Liouvillian free;
  Liouvillian measured;
};

Generators build_generators(const CompositeScenario& sc) {
  const SystemSpec& sys = sc.sys;
  const MeasurementModel& m = sc.model;
  const auto ns = static_cast<Eigen::Index>(sys.num_states());
  const auto nd = static_cast<Eigen::Index>(m.detector_dim());
  const Matrix id_s = Matrix::Identity(ns, ns);
  const Matrix id_d = Matrix::Identity(nd, nd);

  Matrix h0 = Matrix::Zero(ns, ns);
  for (std::size_t l = 0; l < sys.num_levels(); ++l)
    for (std::size_t c = 0; c < sys.num_channels(); ++c) {
      const auto k = static_cast<Eigen::Index>(sys.flat({l, c}));
      h0(k, k) = sys.energy({l, c});
    }
  const Matrix h_sys = kron(h0 + sc.coupling.dense(sys), id_d);

  Matrix h_int = Matrix::Zero(ns * nd, ns * nd);
  std::vector<Matrix> ops;
  for (std::size_t l = 0; l < sys.num_levels(); ++l) {
    const Matrix p = level_projector(sys, l);
    h_int += kron(p, m.detector_hamiltonian(l));
    if (m.level_dephasing_rate() > 0.0) ops.push_back(std::sqrt(m.level_dephasing_rate()) * kron(p, id_d));
  }
  for (const auto& a : m.detector_collapse_ops()) ops.push_back(kron(id_s, a));
  return {Liouvillian(h_sys, {}), Liouvillian(h_sys + h_int, std::move(ops))};
}

// Keeps only blocks diagonal in the system level.
Matrix erase_coherences(const SystemSpec& sys, std::size_t detector_dim, const Matrix& rho) {
  const auto nd = static_cast<Eigen::Index>(detector_dim);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t l = 0; l < sys.num_levels(); ++l) {
    const Matrix p = kron(level_projector(sys, l), Matrix::Identity(nd, nd));
    out += p * rho * p;
  }
  return out;
}

double population(const CompositeScenario& sc, const Matrix& rho, State s) {
  const auto nd = static_cast<Eigen::Index>(sc.model.detector_dim());
  const auto base = static_cast<Eigen::Index>(sc.sys.flat(s)) * nd;
  double p = 0.0;
  for (Eigen::Index d = 0; d < nd; ++d) p += rho(base + d, base + d).real();
  return p;
}

}  // namespace

void CompositeScenario::validate() const {
  if (dim() > kMaxDim)
    throw ConfigError("composite dimension " + std::to_string(dim()) + " exceeds the cap of " +
                      std::to_string(kMaxDim));
  if (!coupling.is_constant()) throw ConfigError("the exact oracle supports time-independent perturbations only");
  coupling.validate(sys);
  schedule.validate();
  if (model.kind() == MeasurementKind::ExplicitDetector && model.measured_level() >= sys.num_levels())
    throw ConfigError("detector measures a level outside the system");
}

CompositeScenario CompositeScenario::with_coupling(const TransitionOperator& v) const {
  CompositeScenario c = *this;
  c.coupling = v;
  return c;
}

CompositeScenario make_decay_scenario(const ReservoirSpectrum& spectrum, double omega_if, int modes, double lo,
                                      double hi, const MeasurementModel& model, const MeasurementSchedule& schedule) {
  if (modes < 1) throw ValidationError("decay scenario needs at least one mode");
  if (!(hi > lo)) throw ValidationError("decay scenario needs lo < hi");
  const double dw = (hi - lo) / modes;
  std::vector<Channel> channels{{"vac", 0.0}};
  for (int k = 0; k < modes; ++k) channels.push_back({"m" + std::to_string(k), lo + (k + 0.5) * dw});
  SystemSpec sys({{"e", omega_if}, {"g", 0.0}}, channels);
  TransitionOperator v;
  for (int k = 0; k < modes; ++k) {
    const double amp = std::sqrt(spectrum(channels[k + 1].energy) * dw);
    if (amp > 0.0) v.set({1, static_cast<std::size_t>(k + 1)}, {0, 0}, amp);
  }
  CompositeScenario sc{sys, v, model, schedule};
  sc.validate();
  return sc;
}

ExactRun exact_evolve(const CompositeScenario& sc, State initial, int cycles) {
  sc.validate();
  sc.sys.check(initial);
  if (cycles < 1) throw ValidationError("exact evolution needs at least one cycle");
  const Generators gen = build_generators(sc);
  const Matrix rho_s = DensityMatrix::basis(sc.sys.num_states(), sc.sys.flat(initial)).matrix();
  ExactRun run;
  run.rho = kron(rho_s, sc.model.rho_d0().matrix());
  run.min_eigenvalue = 1.0;
  auto check = [&run] {
    run.max_trace_drift = std::max(run.max_trace_drift, std::abs(run.rho.trace() - 1.0));
    const Matrix herm = 0.5 * (run.rho + run.rho.adjoint());
    const double ev = Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    run.min_eigenvalue = std::min(run.min_eigenvalue, ev);
  };
  const MeasurementSchedule& s = sc.schedule;
  for (int c = 0; c < cycles; ++c) {
    if (s.tau_f > 0.0) {
      run.rho = propagate(gen.free, run.rho, s.tau_f);
      check();
    }
    if (s.measurement_duration() > 0.0) {
      run.rho = propagate(gen.measured, run.rho, s.measurement_duration());
      check();
    }
    if (sc.model.kind() == MeasurementKind::Projective) {
      run.rho = erase_coherences(sc.sys, sc.model.detector_dim(), run.rho);
      check();
    }
  }
  return run;
}

double exact_jump_probability(const CompositeScenario& sc, State initial, State final_state) {
  sc.sys.check(final_state);
  return population(sc, exact_evolve(sc, initial).rho, final_state);
}

double exact_level_probability(const CompositeScenario& sc, State initial, std::size_t final_level) {
  if (final_level >= sc.sys.num_levels()) throw ConfigError("final level out of range");
  const Matrix rho = exact_evolve(sc, initial).rho;
  double p = 0.0;
  for (std::size_t c = 0; c < sc.sys.num_channels(); ++c) p += population(sc, rho, {final_level, c});
  return p;
}

ConvergenceFit convergence_fit(const CompositeScenario& sc, State initial, State final_state,
                               const std::vector<double>& scale_factors, const QuadratureOptions& opts) {
  if (scale_factors.size() < 3) throw ValidationError("convergence fit needs at least 3 scale factors");
  for (double s : scale_factors)
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("scale factors must be positive");
  const auto [lo, hi] = std::minmax_element(scale_factors.begin(), scale_factors.end());
  if (*hi < 4.0 * *lo) throw ValidationError("scale factors must span at least a factor of 4");

  ConvergenceFit fit;
  fit.scales = scale_factors;
  std::vector<double> xs, ys, yf;
  for (double s : scale_factors) {
    const CompositeScenario scaled = sc.with_coupling(sc.coupling.scaled(s));
    const double we = exact_jump_probability(scaled, initial, final_state);
    if (we > 0.05)
      throw ValidationError("coupling too strong for a convergence fit: exact W = " + std::to_string(we) +
                            " exceeds 0.05");
    const double wf =
        composite_jump_integral(scaled.sys, scaled.coupling, scaled.model, scaled.schedule, initial, final_state, opts)
            .value;
    fit.w_exact.push_back(we);
    fit.w_formula.push_back(wf);
    fit.errors.push_back(std::abs(we - wf));
  }
  if (std::all_of(fit.errors.begin(), fit.errors.end(), [](double e) { return e < 1e-13; }))
    throw InconclusiveError("formula error below 1e-13 at every scale; the fit is dominated by round-off");
  for (std::size_t k = 0; k < scale_factors.size(); ++k) {
    if (fit.errors[k] < 1e-13)
      throw InconclusiveError("formula error below 1e-13 at scale " + std::to_string(scale_factors[k]));
    if (!(fit.w_formula[k] > 0.0)) throw InconclusiveError("formula probability vanishes; nothing to fit");
    xs.push_back(std::log(scale_factors[k]));
    ys.push_back(std::log(fit.errors[k]));
    yf.push_back(std::log(fit.w_formula[k]));
  }
  std::tie(fit.exponent, fit.residual) = fit_line(xs, ys);
  fit.formula_exponent = fit_line(xs, yf).first;
  return fit;
}

double golden_rule_rate(const ReservoirSpectrum& g, double omega_if) {
  return 2.0 * std::numbers::pi * g(omega_if);
}

std::vector<NamedScenario> canonical_scenarios() {
  const double omega_if = 1.0, tau = 2.0;
  const MeasurementSchedule sched{tau, 0.5, 1};
  const int modes = 12;
  std::vector<NamedScenario> out;
  for (const auto& [tag, center] : {std::pair{"resonant", 1.0}, std::pair{"detuned", 2.5}}) {
    const ReservoirSpectrum g = ReservoirSpectrum::lorentzian(center, 0.5, 0.005);
    for (int k = 0; k < 2; ++k) {
      const MeasurementModel m = k == 0 ? make_projective(tau) : make_dephasing(1.0, tau);
      CompositeScenario sc = make_decay_scenario(g, omega_if, modes, center - 1.0, center + 1.0, m, sched);
      // The mode just above the spectrum's centre.
      const State fin{1, static_cast<std::size_t>(modes / 2 + 1)};
      out.push_back({std::string(tag) + "_" + to_string(m.kind()), std::move(sc), State{0, 0}, fin});
    }
  }
  return out;
}

}  // namespace zeno
