#include "zeno/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"

namespace zeno {

using json = nlohmann::json;

namespace {

const std::set<std::string> kOutputs{"components", "survival", "rates", "profile"};

// Wraps a JSON object, tracks which keys were read, names paths in errors.
class Reader {
 public:
  Reader(const json& j, std::string path, bool strict, std::vector<std::string>* warnings)
      : j_(j), path_(std::move(path)), strict_(strict), warnings_(warnings) {
    if (!j_.is_object()) throw ParseError(where() + " must be an object");
  }
  ~Reader() = default;

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ParseError("missing required key '" + child(key) + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ParseError("'" + child(key) + "' must be a number");
    return v.get<double>();
  }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ParseError("'" + child(key) + "' must be an integer");
    return v.get<int>();
  }
  int integer_or(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ParseError("'" + child(key) + "' must be a string");
    return v.get<std::string>();
  }

  const json& array(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ParseError("'" + child(key) + "' must be an array");
    return v;
  }

  Reader object(const std::string& key) { return Reader(get(key), child(key), strict_, warnings_); }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const json& a = array(key);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!a[k].is_number()) throw ParseError("'" + child(key) + "[" + std::to_string(k) + "]' must be a number");
      out.push_back(a[k].get<double>());
    }
    return out;
  }

  // Unknown-key check; call once all known keys have been read.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (used_.count(key)) continue;
      const std::string msg = "unknown key '" + child(key) + "'";
      if (strict_) throw ParseError(msg);
      if (warnings_) warnings_->push_back(msg);
    }
  }

  bool strict() const { return strict_; }
  std::vector<std::string>* warnings() const { return warnings_; }

 private:
  std::string where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  bool strict_;
  std::vector<std::string>* warnings_;
  std::set<std::string> used_;
};

Reader element(const json& a, const std::string& path, std::size_t k, const Reader& parent) {
  return Reader(a[k], path + "[" + std::to_string(k) + "]", parent.strict(), parent.warnings());
}

std::vector<Level> parse_levels(Reader& r, const std::string& key) {
  std::vector<Level> out;
  const json& a = r.array(key);
  for (std::size_t k = 0; k < a.size(); ++k) {
    Reader e = element(a, r.child(key), k, r);
    out.push_back({e.string("label"), e.number("energy")});
    e.finish();
  }
  return out;
}

StateRef parse_state(Reader r) {
  StateRef s{r.string("level"), r.has("channel") ? r.string("channel") : std::string()};
  r.finish();
  return s;
}

LorentzianPeak parse_peak(Reader r) {
  LorentzianPeak p{r.number("center"), r.number("half_width"), r.number("strength")};
  r.finish();
  return p;
}

// Re-raises an engine error with the scenario key it came from.
template <typename Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json state_json(const StateRef& s) { return {{"level", s.level}, {"channel", s.channel}}; }

json peak_json(const LorentzianPeak& p) {
  return {{"center", p.center}, {"half_width", p.half_width}, {"strength", p.strength}};
}

MeasurementKind measurement_kind(const std::string& name, const std::string& path) {
  if (name == "projective") return MeasurementKind::Projective;
  if (name == "dephasing") return MeasurementKind::Dephasing;
  if (name == "two_level_detector") return MeasurementKind::ExplicitDetector;
  throw ParseError("'" + path + "' must be one of projective, dephasing, two_level_detector");
}

SpectrumKind spectrum_kind(const std::string& name, const std::string& path) {
  for (auto k : {SpectrumKind::Lorentzian, SpectrumKind::DoubleLorentzian, SpectrumKind::FlatWindow,
                 SpectrumKind::Tabulated})
    if (to_string(k) == name) return k;
  throw ParseError("'" + path + "' must be one of lorentzian, double_lorentzian, flat_window, tabulated");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double s = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    g[k] = spacing == Spacing::Log ? tau_min * std::pow(tau_max / tau_min, s) : tau_min + s * (tau_max - tau_min);
  }
  if (points > 1) g.back() = tau_max;
  return g;
}

SystemSpec Scenario::system() const { return SystemSpec(levels, channels); }

State Scenario::initial_state() const {
  const SystemSpec sys = system();
  return {sys.level_index(initial.level), initial.channel.empty() ? 0 : sys.channel_index(initial.channel)};
}

std::size_t Scenario::final_level_index() const { return system().level_index(final_level); }

double Scenario::omega_if() const {
  const SystemSpec sys = system();
  return sys.levels()[sys.level_index(initial.level)].energy - sys.levels()[sys.level_index(final_level)].energy;
}

TransitionOperator Scenario::perturbation() const {
  const SystemSpec sys = system();
  TransitionOperator v;
  auto resolve = [&](const StateRef& s) {
    return State{sys.level_index(s.level), s.channel.empty() ? 0 : sys.channel_index(s.channel)};
  };
  for (const auto& c : couplings) v.set(resolve(c.to), resolve(c.from), cplx(c.re, c.im));
  v.set_envelope(envelope);
  v.validate(sys);
  return v;
}

MeasurementModel Scenario::model(double tau) const {
  switch (measurement.kind) {
    case MeasurementKind::Projective:
      return make_projective(tau);
    case MeasurementKind::Dephasing:
      return make_dephasing(measurement.gamma, tau);
    case MeasurementKind::ExplicitDetector:
      return make_two_level_detector(system(), measurement.lambda, measurement.relax_rate, tau,
                                     measurement.measured_level);
  }
  throw ConfigError("unknown measurement kind");
}

ReservoirSpectrum Scenario::reservoir() const {
  if (!spectrum) throw ConfigError("scenario has no spectrum");
  const SpectrumSpec& s = *spectrum;
  switch (s.kind) {
    case SpectrumKind::Lorentzian:
      return ReservoirSpectrum::lorentzian(s.peaks.at(0).center, s.peaks.at(0).half_width, s.peaks.at(0).strength);
    case SpectrumKind::DoubleLorentzian:
      return ReservoirSpectrum::double_lorentzian(s.peaks.at(0), s.peaks.at(1));
    case SpectrumKind::FlatWindow:
      return ReservoirSpectrum::flat_window(s.lo, s.hi, s.strength);
    case SpectrumKind::Tabulated:
      return ReservoirSpectrum::tabulated(s.omega, s.values);
  }
  throw ConfigError("unknown spectrum kind");
}

Scenario parse_scenario(const std::string& text, bool strict, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  Reader root(doc, "", strict, warnings);
  Scenario sc;

  {
    Reader sys = root.object("system");
    sc.levels = parse_levels(sys, "levels");
    if (sys.has("channels")) sc.channels = parse_levels(sys, "channels");
    sys.finish();
  }
  {
    Reader pert = root.object("perturbation");
    sc.initial = parse_state(pert.object("initial"));
    sc.final_level = pert.string("final_level");
    if (pert.has("final_channel")) sc.final_channel = pert.string("final_channel");
    if (pert.has("couplings")) {
      const json& a = pert.array("couplings");
      for (std::size_t k = 0; k < a.size(); ++k) {
        Reader c = element(a, pert.child("couplings"), k, pert);
        CouplingSpec cs;
        cs.from = parse_state(c.object("from"));
        cs.to = parse_state(c.object("to"));
        cs.re = c.number("re");
        cs.im = c.number_or("im", 0.0);
        c.finish();
        sc.couplings.push_back(cs);
      }
    }
    if (pert.has("envelope")) {
      Reader e = pert.object("envelope");
      const std::string kind = e.string("kind");
      if (kind == "constant") {
        sc.envelope = Envelope{};
      } else if (kind == "gaussian") {
        sc.envelope = Envelope{Envelope::Kind::Gaussian, e.number("center"), e.number("width")};
      } else {
        throw ParseError("'perturbation.envelope.kind' must be constant or gaussian");
      }
      e.finish();
    }
    pert.finish();
  }
  {
    Reader m = root.object("measurement");
    sc.measurement.kind = measurement_kind(m.string("kind"), "measurement.kind");
    switch (sc.measurement.kind) {
      case MeasurementKind::Projective:
        break;
      case MeasurementKind::Dephasing:
        sc.measurement.gamma = m.number("gamma");
        break;
      case MeasurementKind::ExplicitDetector:
        sc.measurement.lambda = m.number("lambda");
        sc.measurement.relax_rate = m.number("relax_rate");
        sc.measurement.measured_level = m.string("measured_level");
        break;
    }
    m.finish();
  }
  {
    Reader s = root.object("schedule");
    sc.schedule.tau = s.number("tau");
    sc.schedule.tau_f = s.number_or("tau_f", 0.0);
    sc.schedule.n_repeats = s.integer_or("n_repeats", 1);
    s.finish();
  }
  if (root.has("spectrum")) {
    Reader s = root.object("spectrum");
    SpectrumSpec sp;
    sp.kind = spectrum_kind(s.string("kind"), "spectrum.kind");
    switch (sp.kind) {
      case SpectrumKind::Lorentzian:
        sp.peaks = {{s.number("center"), s.number("half_width"), s.number("strength")}};
        break;
      case SpectrumKind::DoubleLorentzian: {
        const json& a = s.array("peaks");
        if (a.size() != 2) throw ValidationError("'spectrum.peaks' must hold exactly two peaks");
        for (std::size_t k = 0; k < 2; ++k) sp.peaks.push_back(parse_peak(element(a, "spectrum.peaks", k, s)));
        break;
      }
      case SpectrumKind::FlatWindow:
        sp.lo = s.number("lo");
        sp.hi = s.number("hi");
        sp.strength = s.number("strength");
        break;
      case SpectrumKind::Tabulated:
        sp.omega = s.numbers("omega");
        sp.values = s.numbers("values");
        break;
    }
    s.finish();
    sc.spectrum = sp;
  }
  if (root.has("sweep")) {
    Reader s = root.object("sweep");
    SweepSpec sw;
    sw.tau_min = s.number("tau_min");
    sw.tau_max = s.number("tau_max");
    sw.points = s.integer("points");
    const std::string spacing = s.has("spacing") ? s.string("spacing") : "log";
    if (spacing == "log") {
      sw.spacing = Spacing::Log;
    } else if (spacing == "linear") {
      sw.spacing = Spacing::Linear;
    } else {
      throw ParseError("'sweep.spacing' must be linear or log");
    }
    s.finish();
    sc.sweep = sw;
  }
  {
    const json& a = root.array("outputs");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string path = "outputs[" + std::to_string(k) + "]";
      if (!a[k].is_string()) throw ParseError("'" + path + "' must be a string");
      const std::string name = a[k].get<std::string>();
      if (!kOutputs.count(name)) throw ParseError("'" + path + "' names unknown output '" + name + "'");
      sc.outputs.push_back(name);
    }
  }
  if (root.has("unit_scale")) sc.unit_scale = root.number("unit_scale");
  root.finish();

  // Invariants, each reported against the key it concerns.
  const SystemSpec sys = at_path("system", [&] { return sc.system(); });
  at_path("perturbation.initial", [&] { return sc.initial_state(); });
  at_path("perturbation.final_level", [&] { return sc.final_level_index(); });
  if (sc.final_level == sc.initial.level)
    throw ValidationError("'perturbation.final_level' must differ from the initial level");
  if (sc.final_channel) at_path("perturbation.final_channel", [&] { return sys.channel_index(*sc.final_channel); });
  const TransitionOperator v = at_path("perturbation.couplings", [&] { return sc.perturbation(); });
  at_path("schedule", [&] {
    sc.schedule.validate();
    return 0;
  });
  at_path("measurement", [&] { return sc.model(sc.schedule.tau); });
  if (sc.spectrum) {
    at_path("spectrum", [&] { return sc.reservoir(); });
    if (!v.is_constant())
      throw ValidationError("'perturbation.envelope' must be constant when a spectrum drives the rate");
  }
  if (sc.sweep) {
    const SweepSpec& s = *sc.sweep;
    if (!(s.tau_min > 0.0) || !std::isfinite(s.tau_min) || !std::isfinite(s.tau_max))
      throw ValidationError("'sweep.tau_min' must be positive");
    if (!(s.tau_max > s.tau_min)) throw ValidationError("'sweep.tau_max' must exceed 'sweep.tau_min'");
    if (s.points < 8) throw ValidationError("'sweep.points' must be at least 8");
    if (!sc.spectrum) throw ValidationError("'sweep' requires a 'spectrum'");
  }
  if (sc.unit_scale && !(*sc.unit_scale > 0.0)) throw ValidationError("'unit_scale' must be positive");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, bool strict, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), strict, warnings);
}

std::string serialize(const Scenario& sc) {
  json doc;
  json levels = json::array(), channels = json::array();
  for (const auto& l : sc.levels) levels.push_back({{"label", l.label}, {"energy", l.energy}});
  for (const auto& c : sc.channels) channels.push_back({{"label", c.label}, {"energy", c.energy}});
  doc["system"] = {{"levels", levels}, {"channels", channels}};

  json pert = {{"initial", state_json(sc.initial)}, {"final_level", sc.final_level}};
  if (sc.final_channel) pert["final_channel"] = *sc.final_channel;
  json couplings = json::array();
  for (const auto& c : sc.couplings)
    couplings.push_back({{"from", state_json(c.from)}, {"to", state_json(c.to)}, {"re", c.re}, {"im", c.im}});
  pert["couplings"] = couplings;
  if (sc.envelope.kind == Envelope::Kind::Gaussian)
    pert["envelope"] = {{"kind", "gaussian"}, {"center", sc.envelope.center}, {"width", sc.envelope.width}};
  else
    pert["envelope"] = {{"kind", "constant"}};
  doc["perturbation"] = pert;

  json m = {{"kind", to_string(sc.measurement.kind)}};
  if (sc.measurement.kind == MeasurementKind::Dephasing) m["gamma"] = sc.measurement.gamma;
  if (sc.measurement.kind == MeasurementKind::ExplicitDetector) {
    m["lambda"] = sc.measurement.lambda;
    m["relax_rate"] = sc.measurement.relax_rate;
    m["measured_level"] = sc.measurement.measured_level;
  }
  doc["measurement"] = m;
  doc["schedule"] = {{"tau", sc.schedule.tau}, {"tau_f", sc.schedule.tau_f}, {"n_repeats", sc.schedule.n_repeats}};

  if (sc.spectrum) {
    const SpectrumSpec& s = *sc.spectrum;
    json j = {{"kind", to_string(s.kind)}};
    switch (s.kind) {
      case SpectrumKind::Lorentzian:
        j.update(peak_json(s.peaks.at(0)));
        break;
      case SpectrumKind::DoubleLorentzian:
        j["peaks"] = {peak_json(s.peaks.at(0)), peak_json(s.peaks.at(1))};
        break;
      case SpectrumKind::FlatWindow:
        j["lo"] = s.lo;
        j["hi"] = s.hi;
        j["strength"] = s.strength;
        break;
      case SpectrumKind::Tabulated:
        j["omega"] = s.omega;
        j["values"] = s.values;
        break;
    }
    doc["spectrum"] = j;
  }
  if (sc.sweep) {
    doc["sweep"] = {{"tau_min", sc.sweep->tau_min},
                    {"tau_max", sc.sweep->tau_max},
                    {"points", sc.sweep->points},
                    {"spacing", sc.sweep->spacing == Spacing::Log ? "log" : "linear"}};
  }
  doc["outputs"] = sc.outputs;
  if (sc.unit_scale) doc["unit_scale"] = *sc.unit_scale;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

RunReport run_scenario(const Scenario& sc, RunMode mode, const RunOptions& opts) {
  RunReport rep;
  rep.outputs = sc.outputs;
  const SystemSpec sys = sc.system();
  const TransitionOperator v = sc.perturbation();
  const State initial = sc.initial_state();
  const std::size_t fl = sc.final_level_index();
  const double tau = sc.schedule.tau;
  const double omega_if = sc.omega_if();
  const MeasurementModel model = sc.model(tau);
  const LevelPair pair{initial, State{fl, 0}};

  if (mode == RunMode::Profile) {
    if (std::find(rep.outputs.begin(), rep.outputs.end(), "profile") == rep.outputs.end())
      rep.outputs.push_back("profile");
  }
  if (mode == RunMode::Sweep) {
    if (!sc.spectrum || !sc.sweep) throw ValidationError("sweep needs both 'spectrum' and 'sweep' sections");
    if (std::find(rep.outputs.begin(), rep.outputs.end(), "rates") == rep.outputs.end()) rep.outputs.push_back("rates");
  }
  auto wants = [&](const char* name) {
    return std::find(rep.outputs.begin(), rep.outputs.end(), name) != rep.outputs.end();
  };

  if (wants("profile")) {
    const BroadeningProfile p = broadening_profile(model, pair, omega_if, tau);
    const int n = std::max(2, opts.profile_points);
    const double half = 0.5 * p.cutoff();
    for (int k = 0; k < n; ++k) {
      const double w = omega_if - half + 2.0 * half * k / (n - 1);
      rep.profile.emplace_back(w, p(w));
    }
  }
  if (mode == RunMode::Profile) return rep;

  // Discrete channels of the final level.
  const bool discrete = !sc.couplings.empty();
  if (discrete) {
    rep.components.resize(sys.num_channels());
    parallel_for(sys.num_channels(), opts.threads, [&](std::size_t c) {
      const JumpResult r = pulsed_jump_probability(sys, v, model, sc.schedule, initial, {fl, c}, opts.quadrature);
      rep.components[c] = {sys.channels()[c].label, r.w_total, r.w_m, r.w_f, r.w_i};
    });
  }

  if (sc.spectrum) {
    const ReservoirSpectrum g = sc.reservoir();
    rep.rate = overlap_decay_rate(g, broadening_profile(model, pair, omega_if, tau));
    rep.total_probability = rep.rate * tau;
    rep.rate_golden_rule = golden_rule_rate(g, omega_if);
    if (discrete) rep.log.push_back("spectrum present: rate taken from the spectral overlap, not the channel sum");
    if (sc.sweep && (mode == RunMode::Sweep || wants("rates"))) {
      const std::vector<double> grid = sc.sweep->grid();
      const RegimeCurve c = sweep_and_classify(
          g, [&](double t) { return model.kind() == MeasurementKind::ExplicitDetector ? model.with_tau(t) : sc.model(t); },
          pair, omega_if, grid, opts.threads);
      for (std::size_t k = 0; k < c.tau.size(); ++k)
        rep.rates.push_back({c.tau[k], c.rate[k], c.rate_golden_rule, to_string(c.point_label(k))});
    }
  } else {
    double total = 0.0;
    for (const auto& r : rep.components) total += r.w_total;
    rep.total_probability = total;
    rep.rate = std::max(0.0, total / tau);
  }
  if (rep.total_probability > 0.1)
    rep.log.push_back("warning: total jump probability " + fmt(rep.total_probability) +
                      " per cycle exceeds 0.1; second-order perturbation theory is unreliable");

  const int n = sc.schedule.n_repeats;
  for (int k = 0; k <= n; ++k) {
    MeasurementSchedule s = sc.schedule;
    s.n_repeats = std::max(k, 1);
    const double se = k == 0 ? 1.0 : survival(rep.rate, s);
    rep.survival.push_back({static_cast<double>(k), se, survival_power(rep.total_probability, k)});
  }
  return rep;
}

std::vector<std::pair<std::string, std::string>> render_csv(const RunReport& rep) {
  std::vector<std::pair<std::string, std::string>> out;
  auto wants = [&](const char* name) {
    return std::find(rep.outputs.begin(), rep.outputs.end(), name) != rep.outputs.end();
  };
  if (wants("rates") && !rep.rates.empty()) {
    std::string s = "tau,rate,rate_golden_rule,regime\n";
    for (const auto& r : rep.rates) s += fmt(r.tau) + "," + fmt(r.rate) + "," + fmt(r.rate_golden_rule) + "," + r.regime + "\n";
    out.emplace_back("rates.csv", s);
  }
  if (wants("profile") && !rep.profile.empty()) {
    std::string s = "omega,P\n";
    for (const auto& [w, p] : rep.profile) s += fmt(w) + "," + fmt(p) + "\n";
    out.emplace_back("profile.csv", s);
  }
  if (wants("components") && !rep.components.empty()) {
    std::string s = "channel,w_total,w_m,w_f,w_i\n";
    for (const auto& r : rep.components)
      s += r.channel + "," + fmt(r.w_total) + "," + fmt(r.w_m) + "," + fmt(r.w_f) + "," + fmt(r.w_i) + "\n";
    out.emplace_back("components.csv", s);
  }
  if (wants("survival") && !rep.survival.empty()) {
    std::string s = "n,survival_exp,survival_power\n";
    for (const auto& r : rep.survival)
      s += std::to_string(static_cast<int>(r[0])) + "," + fmt(r[1]) + "," + fmt(r[2]) + "\n";
    out.emplace_back("survival.csv", s);
  }
  return out;
}

std::vector<std::filesystem::path> emit_csv(RunReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto files = render_csv(rep);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, body] : files) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw ConfigError("failed to write " + path.string());
    written.push_back(path);
  }
  for (const auto& name : rep.outputs) {
    const std::string file = name + ".csv";
    if (std::none_of(files.begin(), files.end(), [&](const auto& f) { return f.first == file; }))
      rep.log.push_back("omitted " + file + ": section is empty");
  }
  return written;
}

// ---------------------------------------------------------------------------

std::vector<VerifyEntry> run_verify(const std::optional<std::filesystem::path>& dir, const RunOptions& opts,
                                    std::vector<std::string>* log) {
  std::vector<NamedScenario> cases;
  if (!dir) {
    cases = canonical_scenarios();
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(*dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const Scenario sc = load_scenario(f);
      if (sc.couplings.empty()) {
        if (log) log->push_back("skipped " + f.filename().string() + ": no discrete couplings");
        continue;
      }
      const SystemSpec sys = sc.system();
      const TransitionOperator v = sc.perturbation();
      const State initial = sc.initial_state();
      const std::size_t fl = sc.final_level_index();
      State fin{fl, 0};
      if (sc.final_channel) {
        fin.channel = sys.channel_index(*sc.final_channel);
      } else {
        double best = -1.0;
        for (std::size_t c = 0; c < sys.num_channels(); ++c)
          if (std::abs(v.element({fl, c}, initial)) > best) {
            best = std::abs(v.element({fl, c}, initial));
            fin.channel = c;
          }
      }
      cases.push_back({f.stem().string(), CompositeScenario{sys, v, sc.model(sc.schedule.tau), sc.schedule}, initial, fin});
    }
  }
  std::vector<VerifyEntry> out(cases.size());
  const std::vector<double> scales{1.0, 0.5, 0.25};
  parallel_for(cases.size(), opts.threads, [&](std::size_t k) {
    const NamedScenario& n = cases[k];
    const ConvergenceFit f = convergence_fit(n.scenario, n.initial, n.final_state, scales, opts.quadrature);
    out[k] = {n.name, f.exponent, f.residual, f.exponent >= 2.7};
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.scenario < b.scenario; });
  return out;
}

std::string verify_json(const std::vector<VerifyEntry>& entries) {
  json a = json::array();
  for (const auto& e : entries)
    a.push_back({{"scenario", e.scenario}, {"exponent", e.exponent}, {"residual", e.residual}, {"pass", e.pass}});
  return a.dump(2) + "\n";
}

}  // namespace zeno
