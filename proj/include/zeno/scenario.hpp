#pragma once

// Scenario documents (JSON), run orchestration and CSV/JSON emission.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zeno/jump.hpp"
#include "zeno/measurement.hpp"
#include "zeno/oracle.hpp"
#include "zeno/spectral.hpp"
#include "zeno/system.hpp"

namespace zeno {

struct StateRef {
  std::string level;
  std::string channel;
  bool operator==(const StateRef&) const = default;
};

struct CouplingSpec {
  StateRef from;
  StateRef to;
  double re = 0.0;
  double im = 0.0;
  bool operator==(const CouplingSpec&) const = default;
};

struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::Projective;
  double gamma = 0.0;
  double lambda = 0.0;
  double relax_rate = 0.0;
  std::string measured_level;
  bool operator==(const MeasurementSpec&) const = default;
};

struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::Lorentzian;
  std::vector<LorentzianPeak> peaks;  // Lorentzian: one, DoubleLorentzian: two
  double lo = 0.0, hi = 0.0, strength = 0.0;
  std::vector<double> omega, values;
  bool operator==(const SpectrumSpec&) const = default;
};

enum class Spacing { Linear, Log };

struct SweepSpec {
  double tau_min = 0.0;
  double tau_max = 0.0;
  int points = 0;
  Spacing spacing = Spacing::Log;
  std::vector<double> grid() const;
  bool operator==(const SweepSpec&) const = default;
};

struct Scenario {
  std::vector<Level> levels;
  std::vector<Channel> channels;
  StateRef initial;
  std::string final_level;
  /// Final channel for `verify`; defaults to the most strongly coupled one.
  std::optional<std::string> final_channel;
  std::vector<CouplingSpec> couplings;
  Envelope envelope;
  MeasurementSpec measurement;
  MeasurementSchedule schedule;
  std::optional<SpectrumSpec> spectrum;
  std::optional<SweepSpec> sweep;
  std::vector<std::string> outputs;
  std::optional<double> unit_scale;

  bool operator==(const Scenario&) const = default;

  SystemSpec system() const;
  TransitionOperator perturbation() const;
  MeasurementModel model(double tau) const;
  ReservoirSpectrum reservoir() const;
  State initial_state() const;
  std::size_t final_level_index() const;
  /// E_i - E_f for the level pair.
  double omega_if() const;
};

/// Parses and validates a scenario document. Unknown keys raise ParseError
/// when strict, otherwise they are reported through `warnings`.
Scenario parse_scenario(const std::string& text, bool strict = true, std::vector<std::string>* warnings = nullptr);
Scenario load_scenario(const std::filesystem::path& path, bool strict = true,
                       std::vector<std::string>* warnings = nullptr);
/// Canonical JSON with every default written out.
std::string serialize(const Scenario& sc);

enum class RunMode { Run, Sweep, Profile };

struct RunOptions {
  QuadratureOptions quadrature;
  unsigned threads = 0;
  int profile_points = 401;
};

struct ComponentRow {
  std::string channel;
  double w_total = 0, w_m = 0, w_f = 0, w_i = 0;
};

struct RateRow {
  double tau = 0, rate = 0, rate_golden_rule = 0;
  std::string regime;
};

struct RunReport {
  std::vector<std::string> outputs;
  std::vector<ComponentRow> components;
  /// (n, exp(-R n tau), (1 - W)^n)
  std::vector<std::array<double, 3>> survival;
  std::vector<RateRow> rates;
  std::vector<std::pair<double, double>> profile;
  double rate = 0.0;
  double total_probability = 0.0;
  std::optional<double> rate_golden_rule;
  std::vector<std::string> log;
};

RunReport run_scenario(const Scenario& sc, RunMode mode = RunMode::Run, const RunOptions& opts = {});

/// Writes one CSV per requested, non-empty section; returns the paths written.
/// Omitted sections are noted in report.log.
std::vector<std::filesystem::path> emit_csv(RunReport& report, const std::filesystem::path& dir);

/// CSV bodies by file name, without touching the filesystem.
std::vector<std::pair<std::string, std::string>> render_csv(const RunReport& report);

struct VerifyEntry {
  std::string scenario;
  double exponent = 0.0;
  double residual = 0.0;
  bool pass = false;
};

/// Convergence fits for the canonical scenarios, or for every *.json in
/// `dir` that has discrete couplings.
std::vector<VerifyEntry> run_verify(const std::optional<std::filesystem::path>& dir, const RunOptions& opts,
                                    std::vector<std::string>* log = nullptr);
std::string verify_json(const std::vector<VerifyEntry>& entries);

}  // namespace zeno
