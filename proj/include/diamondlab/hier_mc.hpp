#pragma once

#include <cstdint>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/estimate.hpp"
#include "diamondlab/hier_exact.hpp"

namespace diamondlab {

/// Population of samples of log R_n (pinning) or log W_n (polymer).
struct SamplePool {
  DiamondParams params;
  double beta = 0.0;
  double h = 0.0;
  int level = 0;
  std::vector<double> log_values;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  std::size_t size() const noexcept { return log_values.size(); }
};

/// Level-0 pool: bond pinning exp(beta w - lambda + h), bond polymer
/// exp(beta w - lambda), site models 1.
SamplePool initial_pool(const DiamondParams& p, const DisorderLaw& law, double beta, double h, std::size_t M,
                        std::uint64_t seed, std::uint64_t replica = 0);

/// Advances the pool by `steps` levels. Each new sample draws its s (pinning)
/// or b*s (polymer) parents uniformly with replacement from the previous
/// level, times fresh site disorder where the model has it.
SamplePool evolve_pool(const SamplePool& pool, const DisorderLaw& law, int steps = 1);

/// Common Monte Carlo budget.
struct McBudget {
  std::size_t pool_size = 100000;
  int replicas = 32;
  std::uint64_t seed = 1;
};

struct FreeEnergyEstimate {
  Estimate estimate;  // s^-n E log R_n, stderr from the replica spread
  double mean_log = 0.0;
  bool has_sandwich = false;
  double sandwich_lo = 0.0;
  double sandwich_hi = 0.0;
};

/// One row per level 0..n_target.
std::vector<FreeEnergyEstimate> free_energy_series(const DiamondParams& p, const DisorderLaw& law, double beta,
                                                   double h, int n_target, const McBudget& budget);

FreeEnergyEstimate free_energy_estimate(const DiamondParams& p, const DisorderLaw& law, double beta, double h,
                                        int n_target, const McBudget& budget);

enum class FractionalTarget {
  excess,  // E[((R_n - 1)^+)^gamma]
  power,   // E[R_n^theta] (or W_n)
};

Estimate fractional_moment_estimate(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n,
                                    double exponent, FractionalTarget target, const McBudget& budget);

/// Linear-domain pool moments accumulated over replicas.
struct PoolMoments {
  Estimate mean;      // E R_n
  Estimate variance;  // Var R_n
};

std::vector<PoolMoments> pool_moment_series(const DiamondParams& p, const DisorderLaw& law, double beta, double h,
                                            int n_max, const McBudget& budget);

struct VarianceRow {
  int level = 0;
  double variance = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ratio = 0.0;  // variance(level) / variance(level - 1); 0 on the first row
};

/// Per-level variance of log Z_n: within-pool variance averaged over
/// independent replica pools, bootstrap CI over replicas.
std::vector<VarianceRow> variance_log_partition(const DiamondParams& p, const DisorderLaw& law, double beta,
                                                double h, int n_max, const McBudget& budget,
                                                int bootstrap_rounds = 1000);

/// E[max_i mu_m(top-level branch = i)] for a polymer.
Estimate branch_concentration(const DiamondParams& p, const DisorderLaw& law, double beta, int m,
                              const McBudget& budget);

}  // namespace diamondlab
