#include "diamondlab/hier_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "diamondlab/errors.hpp"
#include "diamondlab/parallel.hpp"
#include "diamondlab/rng.hpp"
#include "diamondlab/simd/kernels.hpp"

namespace diamondlab {
namespace {

constexpr std::size_t kChunk = 2048;
constexpr std::uint64_t kTagPool = 0x706f6f6c;   // "pool"
constexpr std::uint64_t kTagRoots = 0x726f6f74;  // "root"
constexpr std::uint64_t kTagBoot = 0x626f6f74;   // "boot"

inline std::size_t uniform_index(Philox& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

std::size_t chunk_count(std::size_t M) { return (M + kChunk - 1) / kChunk; }

// Log of the site-disorder weight exponent shift: -lambda (+ h for pinning).
double site_shift(const DiamondParams& p, double lam, double h) {
  return -lam + (p.model == ModelKind::pinning ? h : 0.0);
}

// Branch log-values for `count` new samples: out[i * count + k] is branch i of
// sample k. Pinning models have one branch.
void draw_branches(const SamplePool& prev, const DisorderLaw& law, double lam, Philox& rng,
                   DisorderSampler& sampler, std::size_t count, std::vector<double>& out) {
  const DiamondParams& p = prev.params;
  const int nb = p.model == ModelKind::pinning ? 1 : p.branches();
  const int s = p.s;
  const bool site = p.placement == Placement::site;
  const double shift = (s - 1) * site_shift(p, lam, prev.h);
  const std::size_t M = prev.size();
  const double* pool = prev.log_values.data();
  out.resize(static_cast<std::size_t>(nb) * count);
  for (int i = 0; i < nb; ++i) {
    double* dst = out.data() + static_cast<std::size_t>(i) * count;
    for (std::size_t k = 0; k < count; ++k) {
      double acc = 0.0;
      for (int j = 0; j < s; ++j) acc += pool[uniform_index(rng, M)];
      if (site) {
        double w = 0.0;
        for (int j = 1; j < s; ++j) w += sampler(rng);
        acc += prev.beta * w + shift;
      }
      dst[k] = acc;
    }
  }
  (void)law;
}

// Log-sum-exp over branches into out[0..count).
void combine_branches(const DiamondParams& p, std::vector<double>& branches, std::size_t count, double* out) {
  const double log_b = std::log(p.b);
  if (p.model == ModelKind::pinning) {
    simd::active().log_add_const(branches.data(), out, count, std::log(p.b - 1.0), -log_b);
    return;
  }
  const int nb = p.branches();
  std::copy_n(branches.data(), count, out);
  for (int i = 1; i < nb; ++i)
    simd::active().log_add_exp(out, branches.data() + static_cast<std::size_t>(i) * count, out, count);
  for (std::size_t k = 0; k < count; ++k) out[k] -= log_b;
}

std::vector<SamplePool> evolve_replicas(const DiamondParams& p, const DisorderLaw& law, double beta, double h,
                                        int n, const McBudget& budget, auto&& per_level) {
  std::vector<SamplePool> pools;
  pools.reserve(budget.replicas);
  for (int r = 0; r < budget.replicas; ++r) {
    SamplePool pool = initial_pool(p, law, beta, h, budget.pool_size, budget.seed, static_cast<std::uint64_t>(r));
    per_level(r, pool);
    for (int k = 0; k < n; ++k) {
      pool = evolve_pool(pool, law, 1);
      per_level(r, pool);
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

void check_budget(const McBudget& b) {
  if (b.pool_size < 2) throw BadParams("pool size must be >= 2");
  if (b.replicas < 1) throw BadParams("replicas must be >= 1");
}

std::string model_tag(const DiamondParams& p) { return p.describe(); }

// Combines per-replica values into an estimate; a single replica falls back
// to the within-pool standard error.
Estimate across_replicas(const std::vector<double>& per_replica, double single_stderr, std::size_t n_samples) {
  Estimate e;
  const MeanStderr ms = mean_stderr(per_replica);
  e.value = ms.mean;
  e.stderr_ = per_replica.size() > 1 ? ms.stderr_ : single_stderr;
  e.n_samples = n_samples;
  return e;
}

}  // namespace

SamplePool initial_pool(const DiamondParams& p, const DisorderLaw& law, double beta, double h, std::size_t M,
                        std::uint64_t seed, std::uint64_t replica) {
  p.validate();
  SamplePool pool{p, beta, h, 0, std::vector<double>(M, 0.0), seed, replica};
  if (p.placement == Placement::site) return pool;
  const double lam = law.log_mgf(beta);
  const double shift = -lam + (p.model == ModelKind::pinning ? h : 0.0);
  parallel_for(chunk_count(M), [&](std::size_t c) {
    Philox rng(seed, stream_id({kTagPool, replica, 0, c}));
    DisorderSampler sampler(law);
    const std::size_t lo = c * kChunk, hi = std::min(M, lo + kChunk);
    for (std::size_t k = lo; k < hi; ++k) pool.log_values[k] = beta * sampler(rng) + shift;
  });
  return pool;
}

SamplePool evolve_pool(const SamplePool& pool, const DisorderLaw& law, int steps) {
  if (steps < 1) throw BadParams("steps must be >= 1");
  const double lam = law.log_mgf(pool.beta);
  SamplePool cur = pool;
  for (int step = 0; step < steps; ++step) {
    SamplePool next{cur.params, cur.beta, cur.h, cur.level + 1, std::vector<double>(cur.size()), cur.seed,
                    cur.replica};
    const std::size_t M = cur.size();
    parallel_for(chunk_count(M), [&](std::size_t c) {
      Philox rng(cur.seed, stream_id({kTagPool, cur.replica, static_cast<std::uint64_t>(next.level), c}));
      DisorderSampler sampler(law);
      const std::size_t lo = c * kChunk, count = std::min(M, lo + kChunk) - lo;
      std::vector<double> branches;
      draw_branches(cur, law, lam, rng, sampler, count, branches);
      combine_branches(cur.params, branches, count, next.log_values.data() + lo);
    });
    cur = std::move(next);
  }
  return cur;
}

std::vector<FreeEnergyEstimate> free_energy_series(const DiamondParams& p, const DisorderLaw& law, double beta,
                                                   double h, int n_target, const McBudget& budget) {
  check_budget(budget);
  if (n_target < 0) throw BadParams("n must be >= 0");
  std::vector<std::vector<double>> means(n_target + 1);
  std::vector<double> single(n_target + 1, 0.0);
  evolve_replicas(p, law, beta, h, n_target, budget, [&](int, const SamplePool& pool) {
    const MeanStderr ms = mean_stderr(pool.log_values);
    means[pool.level].push_back(ms.mean);
    single[pool.level] = ms.stderr_;
  });
  std::vector<FreeEnergyEstimate> out;
  const bool sandwich = p.model == ModelKind::pinning && p.placement == Placement::bond && p.s == 2;
  const double B = p.b;
  for (int n = 0; n <= n_target; ++n) {
    const double w = std::pow(double(p.s), -n);
    FreeEnergyEstimate fe;
    Estimate raw = across_replicas(means[n], single[n], budget.pool_size * budget.replicas);
    fe.mean_log = raw.value;
    fe.estimate = raw;
    fe.estimate.value = w * raw.value;
    fe.estimate.stderr_ = w * raw.stderr_;
    fe.estimate.seed = budget.seed;
    fe.estimate.model = model_tag(p);
    fe.estimate.beta = beta;
    fe.estimate.h = h;
    fe.estimate.level = n;
    if (sandwich) {
      fe.has_sandwich = true;
      fe.sandwich_lo = fe.estimate.value - w * std::log(B);
      fe.sandwich_hi = fe.estimate.value + w * std::log((B * B + B - 1.0) / (B * (B - 1.0)));
    }
    out.push_back(fe);
  }
  return out;
}

FreeEnergyEstimate free_energy_estimate(const DiamondParams& p, const DisorderLaw& law, double beta, double h,
                                        int n_target, const McBudget& budget) {
  return free_energy_series(p, law, beta, h, n_target, budget).back();
}

Estimate fractional_moment_estimate(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n,
                                    double exponent, FractionalTarget target, const McBudget& budget) {
  check_budget(budget);
  if (!(exponent > 0.0 && exponent <= 1.0)) throw BadExponent("fractional exponent must lie in (0, 1]");
  std::vector<double> per_replica;
  double single = 0.0;
  std::vector<double> vals;
  evolve_replicas(p, law, beta, h, n, budget, [&](int, const SamplePool& pool) {
    if (pool.level != n) return;
    vals.resize(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const double L = pool.log_values[k];
      if (target == FractionalTarget::power) {
        vals[k] = std::exp(exponent * L);
      } else {
        const double x = std::expm1(L);
        vals[k] = x > 0.0 ? std::pow(x, exponent) : 0.0;
      }
    }
    const MeanStderr ms = mean_stderr(vals);
    per_replica.push_back(ms.mean);
    single = ms.stderr_;
  });
  Estimate e = across_replicas(per_replica, single, budget.pool_size * budget.replicas);
  e.seed = budget.seed;
  e.model = model_tag(p);
  e.beta = beta;
  e.h = h;
  e.level = n;
  return e;
}

std::vector<PoolMoments> pool_moment_series(const DiamondParams& p, const DisorderLaw& law, double beta, double h,
                                            int n_max, const McBudget& budget) {
  check_budget(budget);
  std::vector<std::vector<double>> means(n_max + 1), vars(n_max + 1);
  std::vector<double> single_m(n_max + 1), single_v(n_max + 1);
  std::vector<double> x;
  evolve_replicas(p, law, beta, h, n_max, budget, [&](int, const SamplePool& pool) {
    x.resize(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) x[k] = std::exp(pool.log_values[k]);
    const MeanStderr ms = mean_stderr(x);
    // Standard error of the sample variance from the fourth central moment.
    double m4 = 0.0;
    for (double v : x) {
      const double d = v - ms.mean;
      m4 += d * d * d * d;
    }
    m4 /= static_cast<double>(x.size());
    means[pool.level].push_back(ms.mean);
    vars[pool.level].push_back(ms.variance);
    single_m[pool.level] = ms.stderr_;
    single_v[pool.level] = std::sqrt(std::max(0.0, m4 - ms.variance * ms.variance) / static_cast<double>(x.size()));
  });
  std::vector<PoolMoments> out;
  for (int n = 0; n <= n_max; ++n) {
    PoolMoments pm;
    pm.mean = across_replicas(means[n], single_m[n], budget.pool_size * budget.replicas);
    pm.variance = across_replicas(vars[n], single_v[n], budget.pool_size * budget.replicas);
    for (Estimate* e : {&pm.mean, &pm.variance}) {
      e->seed = budget.seed;
      e->model = model_tag(p);
      e->beta = beta;
      e->h = h;
      e->level = n;
    }
    out.push_back(pm);
  }
  return out;
}

std::vector<VarianceRow> variance_log_partition(const DiamondParams& p, const DisorderLaw& law, double beta,
                                                double h, int n_max, const McBudget& budget,
                                                int bootstrap_rounds) {
  check_budget(budget);
  if (n_max < 0) throw BadParams("n_max must be >= 0");
  std::vector<std::vector<double>> vars(n_max + 1);
  evolve_replicas(p, law, beta, h, n_max, budget, [&](int, const SamplePool& pool) {
    vars[pool.level].push_back(mean_stderr(pool.log_values).variance);
  });
  std::vector<VarianceRow> out;
  Philox rng(budget.seed, stream_id({kTagBoot, static_cast<std::uint64_t>(n_max)}));
  const std::size_t R = static_cast<std::size_t>(budget.replicas);
  std::vector<double> boot(std::max(bootstrap_rounds, 1));
  for (int n = 0; n <= n_max; ++n) {
    VarianceRow row;
    row.level = n;
    row.variance = mean_stderr(vars[n]).mean;
    for (auto& bm : boot) {
      double acc = 0.0;
      for (std::size_t i = 0; i < R; ++i) acc += vars[n][uniform_index(rng, R)];
      bm = acc / static_cast<double>(R);
    }
    std::sort(boot.begin(), boot.end());
    const auto q = [&](double f) {
      return boot[std::min(boot.size() - 1, static_cast<std::size_t>(f * static_cast<double>(boot.size())))];
    };
    row.ci_lo = std::min(q(0.025), row.variance);
    row.ci_hi = std::max(q(0.975), row.variance);
    if (n > 0 && out.back().variance > 0.0) row.ratio = row.variance / out.back().variance;
    out.push_back(row);
  }
  return out;
}

Estimate branch_concentration(const DiamondParams& p, const DisorderLaw& law, double beta, int m,
                              const McBudget& budget) {
  p.validate();
  check_budget(budget);
  if (p.model != ModelKind::polymer) throw UnsupportedModel("branch concentration is defined for polymers");
  if (m < 1) throw BadParams("m must be >= 1");
  const double lam = law.log_mgf(beta);
  const int nb = p.branches();
  std::vector<double> per_replica;
  double single = 0.0;
  for (int r = 0; r < budget.replicas; ++r) {
    SamplePool pool = initial_pool(p, law, beta, 0.0, budget.pool_size, budget.seed, static_cast<std::uint64_t>(r));
    if (m > 1) pool = evolve_pool(pool, law, m - 1);
    const std::size_t M = pool.size();
    std::vector<double> top(M);
    parallel_for(chunk_count(M), [&](std::size_t c) {
      Philox rng(budget.seed, stream_id({kTagRoots, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(m), c}));
      DisorderSampler sampler(law);
      const std::size_t lo = c * kChunk, count = std::min(M, lo + kChunk) - lo;
      std::vector<double> branches;
      draw_branches(pool, law, lam, rng, sampler, count, branches);
      for (std::size_t k = 0; k < count; ++k) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < nb; ++i) mx = std::max(mx, branches[i * count + k]);
        double z = 0.0;
        for (int i = 0; i < nb; ++i) z += std::exp(branches[i * count + k] - mx);
        top[lo + k] = 1.0 / z;
      }
    });
    const MeanStderr ms = mean_stderr(top);
    per_replica.push_back(ms.mean);
    single = ms.stderr_;
  }
  Estimate e = across_replicas(per_replica, single, budget.pool_size * budget.replicas);
  e.seed = budget.seed;
  e.model = model_tag(p);
  e.beta = beta;
  e.level = m;
  return e;
}

}  // namespace diamondlab
