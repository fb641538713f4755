#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/estimate.hpp"
#include "diamondlab/hier_exact.hpp"

namespace diamondlab {

enum class KernelKind { geometric, srw_return, power_law, custom };

std::string to_string(KernelKind k);

struct KernelSpec {
  KernelKind kind = KernelKind::srw_return;
  double q = 0.5;           // geometric: K(n) = (1 - q) q^{n-1}
  double alpha = 0.5;       // power_law tail exponent
  double log_power = 0.0;   // power_law: K(n) ~ n^{-(1+alpha)} log(1+n)^{log_power}
  double mass = 1.0;        // total mass; < 1 gives a terminating renewal
  std::vector<double> table;  // custom: K(1), K(2), ...; used as given
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Inter-arrival law K(n) = P(tau_1 = n). The first 2^16 values are stored;
/// beyond that only the envelope is used, through certified tail sums.
class RenewalKernel {
 public:
  static constexpr std::size_t kStored = std::size_t{1} << 16;

  const KernelSpec& spec() const noexcept { return spec_; }
  KernelKind kind() const noexcept { return spec_.kind; }

  /// K(n) for n >= 1; n beyond the stored range is evaluated exactly where a
  /// closed form exists and by the envelope midpoint otherwise.
  double operator()(std::size_t n) const;
  std::span<const double> stored() const noexcept { return values_; }

  double total_mass() const noexcept { return mass_; }
  /// Tail exponent; +inf for exponentially decaying or finite kernels.
  double alpha() const noexcept { return alpha_; }
  double log_power() const noexcept { return spec_.log_power; }
  /// C with K(n) <= C n^{-(1+alpha)} log(1+n)^{log_power} for every n >= 1.
  double envelope_constant() const noexcept { return envelope_; }

  /// Bounds on sum_{n > N} K(n)^gamma e^{-n x}.
  Interval tail_sum(std::size_t N, double gamma = 1.0, double x = 0.0) const;
  /// Bounds on sum_{n <= N} K(n)^gamma e^{-n x} + tail: the full series.
  Interval series(double gamma, double x, std::size_t N) const;
  /// P(tau_1 > n) including the defect 1 - mass.
  double survival(std::size_t n) const;

  std::string describe() const;

  friend RenewalKernel make_kernel(const KernelSpec& spec);

 private:
  // Lower and upper envelopes of K(t)^gamma e^{-t x} on t > kStored.
  double envelope_lo(double t, double gamma, double x) const;
  double envelope_hi(double t, double gamma, double x) const;

  KernelSpec spec_;
  std::vector<double> values_;     // K(1..kStored), or the custom table
  std::vector<double> survival_;   // P(tau > n), n = 0..values_.size()
  double mass_ = 1.0;
  double alpha_ = 0.0;
  double envelope_ = 0.0;
  double norm_ = 1.0;  // power_law prefactor
};

RenewalKernel make_kernel(const KernelSpec& spec);

inline RenewalKernel geometric_kernel(double q, double mass = 1.0) {
  KernelSpec s;
  s.kind = KernelKind::geometric;
  s.q = q;
  s.mass = mass;
  return make_kernel(s);
}
inline RenewalKernel srw_kernel() { return make_kernel(KernelSpec{}); }
inline RenewalKernel power_law_kernel(double alpha, double log_power = 0.0, double mass = 1.0) {
  KernelSpec s;
  s.kind = KernelKind::power_law;
  s.alpha = alpha;
  s.log_power = log_power;
  s.mass = mass;
  return make_kernel(s);
}

/// -log of the total mass.
double renewal_critical_point(const RenewalKernel& K);

/// F(h): the x > 0 solving sum_n e^{-n x} K(n) = e^{-h}, or [0,0] for
/// h <= h_c. Throws ToleranceNotReached (with the achieved width in the
/// message) if the certified interval cannot be brought below tol.
CertifiedValue homogeneous_free_energy(const RenewalKernel& K, double h, double tol);

/// log Z_n(h), n = 0..N, for the homogeneous model; pinned endpoint
/// (n in tau) or free endpoint.
std::vector<double> homogeneous_log_partition(const RenewalKernel& K, double h, std::size_t N,
                                              bool free_endpoint = false);

/// log Z_{n,omega}, n = 0..N, pinned endpoint, with reward beta omega_n + h
/// at each contact n >= 1.
std::vector<double> quenched_log_partition(const RenewalKernel& K, std::span<const double> omega, double beta,
                                           double h);

/// Disorder environments for the quenched DP: replica r draws N values from
/// its own stream.
std::vector<double> renewal_environment(const DisorderLaw& law, std::size_t N, std::uint64_t seed,
                                        std::uint64_t replica);

struct QuenchedSummary {
  Estimate mean_partition;    // E Z_{N,omega}
  Estimate log_partition;     // N^{-1} E log Z_{N,omega}
  double annealed_log_partition = 0.0;  // log Z_N(h + lambda(beta))
  std::vector<double> log_samples;      // log Z_{N,omega} per replica
};

QuenchedSummary quenched_summary(const RenewalKernel& K, const DisorderLaw& law, double beta, double h,
                                 std::size_t N, std::size_t replicas, std::uint64_t seed);

struct TiltedAnnealed {
  double h_eff = 0.0;
  double log_partition = 0.0;  // log Z_N(h_eff), pinned
};

/// Pinned partition of the tilted annealed model: the tilt changes the
/// contact reward to h + log M(beta - tilt) - log M(-tilt).
TiltedAnnealed tilted_annealed(const RenewalKernel& K, const DisorderLaw& law, double beta, double h, double tilt,
                               std::size_t N);

struct AsymptoticsCheck {
  double slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double reference = 0.0;  // max(1, 1/alpha)
  std::vector<double> h;
  std::vector<double> F;
};

/// Log-log slope of F(h_c + dh) against dh over the given offsets.
AsymptoticsCheck critical_asymptotics_check(const RenewalKernel& K, std::span<const double> offsets,
                                            std::uint64_t seed = 1, int bootstrap_rounds = 1000);

/// Geometric grid of `count` offsets over [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, int count);

}  // namespace diamondlab
