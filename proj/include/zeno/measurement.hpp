#pragma once

// Non-demolition measurement kernels. A model acts on the system block
// |n alpha><m alpha'| (x) rho_D by a detector superoperator that depends
// only on the level pair (n, m); the channel index never enters.
//
// Every kernel is generated by a pair-conditioned detector Lindbladian
//
//   L_nm(X) = -i (h_n X - X h_m) + sum_k (A_k X A_k^+ - 1/2 {A_k^+ A_k, X})
//             - gamma [n != m] X
//
// where h_n is the detector Hamiltonian while the system sits in level n.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/system.hpp"

namespace zeno {

/// Kernel index: the system block |left><right|.
struct LevelPair {
  State left;
  State right;
  bool diagonal() const { return left.level == right.level; }
};

enum class MeasurementKind { Projective, Dephasing, ExplicitDetector };

std::string to_string(MeasurementKind k);

class MeasurementModel {
 public:
  MeasurementKind kind() const { return kind_; }
  std::size_t detector_dim() const { return rho_d0_.dim(); }
  const DensityMatrix& rho_d0() const { return rho_d0_; }
  double tau() const { return tau_; }
  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  double relax_rate() const { return relax_; }
  std::size_t measured_level() const { return measured_level_; }

  /// Detector Hamiltonian while the system is in `level`.
  Matrix detector_hamiltonian(std::size_t level) const;
  std::vector<Matrix> detector_collapse_ops() const;
  /// Rate at which system coherences between distinct levels are damped
  /// directly (Dephasing); zero otherwise.
  double level_dephasing_rate() const { return kind_ == MeasurementKind::Dephasing ? gamma_ : 0.0; }

  /// d^2 x d^2 generator L_nm for system levels n, m.
  Matrix pair_generator(std::size_t n, std::size_t m) const;
  /// Upper bound on the variation rate of the pair kernel.
  double rate_scale(const LevelPair& pair) const;

  /// Superoperator S_pair(dt) = exp(L_pair dt); the projective model erases
  /// off-diagonal blocks once dt exceeds the cycle length tau.
  Matrix kernel(const LevelPair& pair, double dt) const;
  /// The 1x1 kernel value for detector_dim() == 1.
  cplx scalar_kernel(const LevelPair& pair, double dt) const;
  /// S_pair(t1, t2) applied to rho_d. Requires t2 <= t1.
  Matrix kernel_apply(const LevelPair& pair, double t1, double t2, const Matrix& rho_d) const;
  /// F_pair(t) = Tr{S_pair(t) rho_D(0)}.
  cplx decoherence_function(const LevelPair& pair, double t) const;
  /// dF/dt at t = 0.
  cplx decoherence_slope(const LevelPair& pair) const;

  /// Whether S_{left,right} and S_{left,left} commute, which the
  /// single-integral broadening profile requires.
  bool interchange_valid(const LevelPair& pair) const;

  /// The same model with a different cycle length.
  MeasurementModel with_tau(double tau) const;

  friend MeasurementModel make_projective(double tau);
  friend MeasurementModel make_dephasing(double gamma, double tau);
  friend MeasurementModel make_two_level_detector(const SystemSpec& sys, double lambda, double relax_rate,
                                                  double tau, const std::string& measured_level);

 private:
  struct Cache;
  MeasurementModel(MeasurementKind kind, DensityMatrix rho_d0, double tau);

  MeasurementKind kind_;
  DensityMatrix rho_d0_;
  double tau_;
  double gamma_ = 0.0;
  double lambda_ = 0.0;
  double relax_ = 0.0;
  std::size_t measured_level_ = 0;
  std::size_t num_levels_ = 0;
  std::vector<char> interchange_;  // num_levels_ x num_levels_
  std::shared_ptr<Cache> cache_;
};

/// Ideal instantaneous measurement at the end of each cycle: F = Theta(tau - t).
MeasurementModel make_projective(double tau);
/// Exponential dephasing F = exp(-gamma t) between distinct levels.
MeasurementModel make_dephasing(double gamma, double tau);
/// Two-level detector starting in its ground state, resonantly driven at
/// rate lambda while the system occupies `measured_level`, relaxing back at
/// relax_rate.
MeasurementModel make_two_level_detector(const SystemSpec& sys, double lambda, double relax_rate, double tau,
                                         const std::string& measured_level);

}  // namespace zeno
