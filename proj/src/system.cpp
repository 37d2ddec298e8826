#include "zeno/system.hpp"

#include <cmath>
#include <set>

#include "zeno/errors.hpp"

namespace zeno {

SystemSpec::SystemSpec(std::vector<Level> levels, std::vector<Channel> channels)
    : levels_(std::move(levels)), channels_(std::move(channels)) {
  if (levels_.empty()) throw ValidationError("system needs at least one level");
  if (channels_.empty()) channels_.push_back({"0", 0.0});
  std::set<std::string> seen;
  for (const auto& l : levels_) {
    if (!std::isfinite(l.energy)) throw ValidationError("level '" + l.label + "' has non-finite energy");
    if (!seen.insert(l.label).second) throw ValidationError("duplicate level label '" + l.label + "'");
  }
  seen.clear();
  for (const auto& c : channels_) {
    if (!std::isfinite(c.energy)) throw ValidationError("channel '" + c.label + "' has non-finite energy");
    if (!seen.insert(c.label).second) throw ValidationError("duplicate channel label '" + c.label + "'");
  }
}

std::size_t SystemSpec::level_index(const std::string& label) const {
  for (std::size_t k = 0; k < levels_.size(); ++k)
    if (levels_[k].label == label) return k;
  throw ConfigError("unknown level '" + label + "'");
}

std::size_t SystemSpec::channel_index(const std::string& label) const {
  for (std::size_t k = 0; k < channels_.size(); ++k)
    if (channels_[k].label == label) return k;
  throw ConfigError("unknown channel '" + label + "'");
}

void SystemSpec::check(State s) const {
  if (s.level >= levels_.size()) throw ConfigError("level index out of range");
  if (s.channel >= channels_.size()) throw ConfigError("channel index out of range");
}

double Envelope::operator()(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::Gaussian: {
      const double z = (t - center) / width;
      return std::exp(-0.5 * z * z);
    }
  }
  return 1.0;
}

void TransitionOperator::set(State a, State b, cplx amplitude) {
  if (a == b) throw ValidationError("transition operator diagonal entries must be zero");
  entries_[{a, b}] = amplitude;
  entries_[{b, a}] = std::conj(amplitude);
}

cplx TransitionOperator::element(State a, State b) const {
  const auto it = entries_.find({a, b});
  return it == entries_.end() ? cplx(0.0) : it->second;
}

TransitionOperator TransitionOperator::scaled(double s) const {
  TransitionOperator out = *this;
  for (auto& [key, v] : out.entries_) v *= s;
  return out;
}

Matrix TransitionOperator::dense(const SystemSpec& sys) const {
  const auto n = static_cast<Eigen::Index>(sys.num_states());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& [key, v] : entries_)
    m(static_cast<Eigen::Index>(sys.flat(key.first)), static_cast<Eigen::Index>(sys.flat(key.second))) = v;
  return m;
}

void TransitionOperator::validate(const SystemSpec& sys) const {
  for (const auto& [key, v] : entries_) {
    sys.check(key.first);
    sys.check(key.second);
    if (key.first == key.second) throw ValidationError("transition operator diagonal entries must be zero");
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ValidationError("transition operator has non-finite entries");
    if (std::abs(v - std::conj(element(key.second, key.first))) > 1e-12)
      throw ValidationError("transition operator is not Hermitian");
  }
  if (envelope_.kind == Envelope::Kind::Gaussian && !(envelope_.width > 0.0))
    throw ValidationError("envelope width must be positive");
}

void MeasurementSchedule::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("schedule tau must be positive");
  if (!(tau_f >= 0.0) || tau_f > tau) throw ValidationError("schedule tau_f must lie in [0, tau]");
  if (n_repeats < 1) throw ValidationError("schedule n_repeats must be positive");
}

}  // namespace zeno
