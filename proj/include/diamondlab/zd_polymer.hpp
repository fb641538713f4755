#pragma once

#include <cstdint>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/estimate.hpp"

namespace diamondlab {

// Directed polymer on Z^d, d in {1, 2}, free endpoint. Sites reachable at
// time n are indexed in rotated coordinates: for d = 1, x = 2i - n with
// i in [0, n]; for d = 2, u = x + y = 2i - n and v = x - y = 2j - n, so the
// walk is a pair of independent +-1 walks and every slice is a
// (n + 1) x (n + 1) grid in (i, j), row-major in i.

inline constexpr int kZdMaxN1 = 4096;
inline constexpr int kZdMaxN2 = 256;

/// Disorder on the reachable sites at one time.
struct EnvSlice {
  int d = 1;
  int time = 0;
  std::vector<double> values;  // (time + 1)^d entries
  std::uint64_t stream = 0;
};

/// Slice `time` of environment (seed, replica). Deterministic.
EnvSlice env_slice(const DisorderLaw& law, int d, int time, std::uint64_t seed, std::uint64_t replica);

struct TransferResult {
  double log_W = 0.0;
  /// W_N(x) = exp(log_scale) * endpoint[x], indexed as above.
  std::vector<double> endpoint;
  double log_scale = 0.0;
};

/// log W_N for environment (seed, replica). Throws TooLarge above the desk
/// caps (d = 1: N <= 4096, d = 2: N <= 256).
TransferResult transfer_partition(int d, const DisorderLaw& law, double beta, int N, std::uint64_t seed,
                                  std::uint64_t replica = 0);

struct ZdFreeEnergy {
  Estimate estimate;  // p_N = N^{-1} E log W_N
  /// value - 3 stderr <= 0, the annealed bound p_N <= 0.
  bool annealed_compatible = true;
  std::vector<double> log_W;  // per replica
};

ZdFreeEnergy quenched_free_energy_zd(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                     std::uint64_t seed);

/// I_N = sum_{n <= N} sum_z mu_N(S_n = z)^2 for one environment, from
/// forward and backward transfers.
double overlap(int d, const DisorderLaw& law, double beta, int N, std::uint64_t seed, std::uint64_t replica);

struct OverlapCheck {
  Estimate overlap;     // E I_N
  Estimate derivative;  // (p_N(beta + eps) - p_N(beta - eps)) / (2 eps)
  Estimate predicted;   // -(beta / N) E I_N
  Estimate discrepancy; // derivative - predicted, paired per replica
  double bias_estimate = 0.0;  // O(eps^2) term, from the 2 eps difference
  bool within_budget = false;
};

/// Gaussian integration by parts gives dp_N/dbeta = -(beta/N) E I_N. Throws
/// NonGaussianLaw unless the law is the standard Gaussian, BadParams unless
/// 0 < eps < beta / 2.
OverlapCheck overlap_and_derivative_check(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                          double eps, std::uint64_t seed, double z = 3.0);

/// E[W_N^2] = E^{(2)} exp(gamma(beta) sum_{n <= N} 1{S_n = S'_n}), computed by
/// one transfer of the difference walk.
double second_moment_exact(int d, const DisorderLaw& law, double beta, int N);

struct SecondMomentCheck {
  Estimate mc;  // replica mean of W_N^2
  double exact = 0.0;
  bool agrees = false;  // within 4 stderr
};

SecondMomentCheck second_moment_crosscheck(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                           std::uint64_t seed);

}  // namespace diamondlab
