#pragma once

// Measured system description: discrete levels of H0, reservoir channels
// of H1, the perturbation V driving jumps, and the measurement schedule.
// Energies are angular frequencies (hbar = 1).

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "zeno/linalg.hpp"

namespace zeno {

struct Level {
  std::string label;
  double energy = 0.0;
  bool operator==(const Level&) const = default;
};

using Channel = Level;

/// Basis state |n alpha> by index into SystemSpec::levels / channels.
struct State {
  std::size_t level = 0;
  std::size_t channel = 0;
  auto operator<=>(const State&) const = default;
};

class SystemSpec {
 public:
  /// An empty channel list is replaced by a single zero-energy channel.
  SystemSpec(std::vector<Level> levels, std::vector<Channel> channels = {});

  const std::vector<Level>& levels() const { return levels_; }
  const std::vector<Channel>& channels() const { return channels_; }
  std::size_t num_levels() const { return levels_.size(); }
  std::size_t num_channels() const { return channels_.size(); }
  std::size_t num_states() const { return levels_.size() * channels_.size(); }

  double energy(State s) const { return levels_.at(s.level).energy + channels_.at(s.channel).energy; }
  /// omega_{to,from} = E_to - E_from.
  double omega(State to, State from) const { return energy(to) - energy(from); }

  std::size_t level_index(const std::string& label) const;
  std::size_t channel_index(const std::string& label) const;
  /// Flat index level * num_channels + channel.
  std::size_t flat(State s) const { return s.level * channels_.size() + s.channel; }
  void check(State s) const;

  bool operator==(const SystemSpec&) const = default;

 private:
  std::vector<Level> levels_;
  std::vector<Channel> channels_;
};

/// Real scalar time envelope v(t) multiplying the static operator.
struct Envelope {
  enum class Kind { Constant, Gaussian };
  Kind kind = Kind::Constant;
  double center = 0.0;
  double width = 1.0;

  double operator()(double t) const;
  bool operator==(const Envelope&) const = default;
};

/// Hermitian perturbation V(t) = v(t) * V, zero on the diagonal.
class TransitionOperator {
 public:
  TransitionOperator() = default;

  /// Sets V_{a,b} and V_{b,a} = conj(V_{a,b}).
  void set(State a, State b, cplx amplitude);
  cplx element(State a, State b) const;
  cplx element(State a, State b, double t) const { return envelope_(t) * element(a, b); }

  const std::map<std::pair<State, State>, cplx>& entries() const { return entries_; }
  const Envelope& envelope() const { return envelope_; }
  void set_envelope(Envelope e) { envelope_ = e; }
  bool is_constant() const { return envelope_.kind == Envelope::Kind::Constant; }

  TransitionOperator scaled(double s) const;
  /// Dense matrix over the flat system basis.
  Matrix dense(const SystemSpec& sys) const;
  void validate(const SystemSpec& sys) const;

  bool operator==(const TransitionOperator&) const = default;

 private:
  std::map<std::pair<State, State>, cplx> entries_;
  Envelope envelope_{};
};

/// One measurement cycle: free evolution for tau_f, then measurement
/// until tau; repeated n_repeats times.
struct MeasurementSchedule {
  double tau = 1.0;
  double tau_f = 0.0;
  int n_repeats = 1;

  void validate() const;
  double measurement_duration() const { return tau - tau_f; }
  bool operator==(const MeasurementSchedule&) const = default;
};

}  // namespace zeno
