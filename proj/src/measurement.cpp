#include "zeno/measurement.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "zeno/errors.hpp"

namespace zeno {

std::string to_string(MeasurementKind k) {
  switch (k) {
    case MeasurementKind::Projective:
      return "projective";
    case MeasurementKind::Dephasing:
      return "dephasing";
    case MeasurementKind::ExplicitDetector:
      return "two_level_detector";
  }
  return "unknown";
}

// Kernel superoperators keyed by (n, m, dt). Only the explicit detector
// needs it; scalar kernels are cheaper to recompute than to look up.
struct MeasurementModel::Cache {
  struct Key {
    std::size_t n, m;
    std::uint64_t dt_bits;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<std::uint64_t>{}(k.dt_bits);
      h ^= (k.n * 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
      h ^= (k.m * 0xc2b2ae3d27d4eb4fULL) + (h << 6) + (h >> 2);
      return h;
    }
  };
  static constexpr std::size_t kMaxEntries = std::size_t{1} << 18;

  std::shared_mutex mu;
  std::unordered_map<Key, Matrix, Hash> entries;
  std::vector<Matrix> generators;  // n * num_levels + m
};

MeasurementModel::MeasurementModel(MeasurementKind kind, DensityMatrix rho_d0, double tau)
    : kind_(kind), rho_d0_(std::move(rho_d0)), tau_(tau), cache_(std::make_shared<Cache>()) {}

MeasurementModel make_projective(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("projective tau must be positive");
  return MeasurementModel(MeasurementKind::Projective, DensityMatrix::basis(1, 0), tau);
}

MeasurementModel make_dephasing(double gamma, double tau) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("dephasing gamma must be non-negative");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("dephasing tau must be positive");
  MeasurementModel m(MeasurementKind::Dephasing, DensityMatrix::basis(1, 0), tau);
  m.gamma_ = gamma;
  return m;
}

MeasurementModel make_two_level_detector(const SystemSpec& sys, double lambda, double relax_rate, double tau,
                                         const std::string& measured_level) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("detector lambda must be non-negative");
  if (!(relax_rate >= 0.0) || !std::isfinite(relax_rate))
    throw ValidationError("detector relax_rate must be non-negative");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("detector tau must be positive");
  const std::size_t level = sys.level_index(measured_level);
  MeasurementModel m(MeasurementKind::ExplicitDetector, DensityMatrix::basis(2, 0), tau);
  m.lambda_ = lambda;
  m.relax_ = relax_rate;
  m.measured_level_ = level;
  m.num_levels_ = sys.num_levels();

  const std::size_t nl = m.num_levels_;
  m.cache_->generators.resize(nl * nl);
  for (std::size_t a = 0; a < nl; ++a)
    for (std::size_t b = 0; b < nl; ++b) m.cache_->generators[a * nl + b] = m.pair_generator(a, b);
  m.interchange_.assign(nl * nl, 0);
  for (std::size_t a = 0; a < nl; ++a) {
    const Matrix& diag = m.cache_->generators[a * nl + a];
    for (std::size_t b = 0; b < nl; ++b) {
      const Matrix& off = m.cache_->generators[a * nl + b];
      const double comm = (diag * off - off * diag).cwiseAbs().maxCoeff();
      m.interchange_[a * nl + b] = comm <= 1e-10 ? 1 : 0;
    }
  }
  return m;
}

MeasurementModel MeasurementModel::with_tau(double tau) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  MeasurementModel m = *this;
  m.tau_ = tau;
  // Kernels do not depend on tau, but keep caches private to each instance.
  auto fresh = std::make_shared<Cache>();
  fresh->generators = cache_->generators;
  m.cache_ = std::move(fresh);
  return m;
}

Matrix MeasurementModel::detector_hamiltonian(std::size_t level) const {
  const auto d = static_cast<Eigen::Index>(detector_dim());
  Matrix h = Matrix::Zero(d, d);
  if (kind_ == MeasurementKind::ExplicitDetector && level == measured_level_) {
    h(0, 1) = lambda_;
    h(1, 0) = lambda_;
  }
  return h;
}

std::vector<Matrix> MeasurementModel::detector_collapse_ops() const {
  if (kind_ != MeasurementKind::ExplicitDetector || relax_ == 0.0) return {};
  Matrix lower = Matrix::Zero(2, 2);
  lower(0, 1) = std::sqrt(relax_);  // |g><e|
  return {lower};
}

Matrix MeasurementModel::pair_generator(std::size_t n, std::size_t m) const {
  const auto d = static_cast<Eigen::Index>(detector_dim());
  const Matrix id = Matrix::Identity(d, d);
  const cplx i(0.0, 1.0);
  const Matrix hn = detector_hamiltonian(n);
  const Matrix hm = detector_hamiltonian(m);
  Matrix s = -i * (kron(id, hn) - kron(hm.transpose(), id));
  for (const auto& a : detector_collapse_ops()) {
    const Matrix ada = a.adjoint() * a;
    s += kron(a.conjugate(), a) - 0.5 * (kron(id, ada) + kron(ada.transpose(), id));
  }
  if (n != m) s -= level_dephasing_rate() * Matrix::Identity(d * d, d * d);
  return s;
}

double MeasurementModel::rate_scale(const LevelPair& pair) const {
  const Matrix g = pair_generator(pair.left.level, pair.right.level);
  return g.cwiseAbs().colwise().sum().maxCoeff();
}

cplx MeasurementModel::scalar_kernel(const LevelPair& pair, double dt) const {
  const std::size_t n = pair.left.level, m = pair.right.level;
  switch (kind_) {
    case MeasurementKind::Projective:
      return (n != m && dt > tau_) ? 0.0 : 1.0;
    case MeasurementKind::Dephasing:
      return n != m ? std::exp(-gamma_ * dt) : 1.0;
    case MeasurementKind::ExplicitDetector:
      break;
  }
  throw ConfigError("scalar kernel requested for a detector with internal states");
}

Matrix MeasurementModel::kernel(const LevelPair& pair, double dt) const {
  if (dt < 0.0) throw ValidationError("kernel duration must be non-negative");
  if (kind_ != MeasurementKind::ExplicitDetector) return Matrix::Constant(1, 1, scalar_kernel(pair, dt));
  const std::size_t n = pair.left.level, m = pair.right.level;
  if (n >= num_levels_ || m >= num_levels_) throw ConfigError("level index outside the detector's system");
  const Cache::Key key{n, m, std::bit_cast<std::uint64_t>(dt)};
  {
    std::shared_lock lock(cache_->mu);
    const auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
  }
  Matrix k = matrix_exp(cache_->generators[n * num_levels_ + m] * dt);
  std::unique_lock lock(cache_->mu);
  if (cache_->entries.size() >= Cache::kMaxEntries) cache_->entries.clear();
  cache_->entries.emplace(key, k);
  return k;
}

Matrix MeasurementModel::kernel_apply(const LevelPair& pair, double t1, double t2, const Matrix& rho_d) const {
  if (t2 < 0.0) throw ValidationError("kernel times must be non-negative");
  if (t1 < t2) throw ValidationError("kernel_apply requires t2 <= t1");
  const auto d = static_cast<Eigen::Index>(detector_dim());
  if (rho_d.rows() != d || rho_d.cols() != d) throw ConfigError("detector matrix has the wrong dimension");
  return unvec(kernel(pair, t1 - t2) * vec(rho_d), d);
}

cplx MeasurementModel::decoherence_function(const LevelPair& pair, double t) const {
  if (t < 0.0) throw ValidationError("decoherence function needs t >= 0");
  return kernel_apply(pair, t, 0.0, rho_d0_.matrix()).trace();
}

cplx MeasurementModel::decoherence_slope(const LevelPair& pair) const {
  const auto d = static_cast<Eigen::Index>(detector_dim());
  const Vector dv = pair_generator(pair.left.level, pair.right.level) * vec(rho_d0_.matrix());
  return unvec(dv, d).trace();
}

bool MeasurementModel::interchange_valid(const LevelPair& pair) const {
  if (kind_ != MeasurementKind::ExplicitDetector) return true;
  const std::size_t n = pair.left.level, m = pair.right.level;
  if (n >= num_levels_ || m >= num_levels_) throw ConfigError("level index outside the detector's system");
  return interchange_[n * num_levels_ + m] != 0;
}

}  // namespace zeno
