#include "diamondlab/zd_polymer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diamondlab/errors.hpp"
#include "diamondlab/parallel.hpp"
#include "diamondlab/rng.hpp"
#include "diamondlab/simd/kernels.hpp"

namespace diamondlab {
namespace {

constexpr std::uint64_t kTagZd = 0x7a64656e;  // "zden"

void check_size(int d, int N) {
  if (d != 1 && d != 2) throw BadParams("zd polymer supports d = 1 and d = 2");
  if (N < 0) throw BadParams("N must be >= 0");
  const int cap = d == 1 ? kZdMaxN1 : kZdMaxN2;
  if (N > cap) throw TooLarge("zd polymer: N=" + std::to_string(N) + " exceeds the d=" + std::to_string(d) +
                              " cap " + std::to_string(cap));
  const double window = std::pow(2.0 * N + 1.0, d);
  if (window > double(1 << 26)) throw TooLarge("zd polymer: window exceeds 2^26 sites");
}

std::size_t slice_size(int d, int n) {
  const std::size_t side = std::size_t(n) + 1;
  return d == 1 ? side : side * side;
}

// in: (n x n) or n; out: (n+1 x n+1) or n+1, out[.] = sum of the 2^d parents.
void spread(int d, int n, const std::vector<double>& in, std::vector<double>& out, std::vector<double>& tmp) {
  const auto& k = simd::active();
  if (d == 1) {
    out.resize(n + 1);
    k.pair_sum(in.data(), out.data(), n);
    return;
  }
  const std::size_t w = n + 1;
  tmp.resize(std::size_t(n) * w);
  for (int i = 0; i < n; ++i) k.pair_sum(in.data() + std::size_t(i) * n, tmp.data() + std::size_t(i) * w, n);
  out.assign(w * w, 0.0);
  std::copy_n(tmp.data(), w, out.data());
  for (int i = 1; i < n; ++i)
    k.add(tmp.data() + std::size_t(i - 1) * w, tmp.data() + std::size_t(i) * w, out.data() + std::size_t(i) * w, w);
  if (n > 0) std::copy_n(tmp.data() + std::size_t(n - 1) * w, w, out.data() + std::size_t(n) * w);
}

// Adjoint of spread: in (n+1 grid) -> out (n grid), out[.] = sum of the 2^d
// children.
void gather(int d, int n, const std::vector<double>& in, std::vector<double>& out, std::vector<double>& tmp) {
  if (d == 1) {
    out.resize(n);
    for (int i = 0; i < n; ++i) out[i] = in[i] + in[i + 1];
    return;
  }
  const std::size_t w = n + 1;
  tmp.resize(std::size_t(n) * w);
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) tmp[i * w + j] = in[i * w + j] + in[(i + 1) * w + j];
  out.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[std::size_t(i) * n + j] = tmp[i * w + j] + tmp[i * w + j + 1];
}

// Rescales x by its maximum; returns the log of the factor removed.
double renormalize(std::vector<double>& x) {
  const auto& k = simd::active();
  const double m = k.max(x.data(), x.size());
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("zd polymer transfer lost all mass");
  k.scale(x.data(), x.size(), 1.0 / m);
  return std::log(m);
}

bool standard_gaussian(const DisorderLaw& law) { return law.is_gaussian() && law.gaussian_mean() == 0.0; }

// Forward slices f_1..f_N (each scaled by its own maximum), with their log
// scales; f_0 = [1].
struct Forward {
  std::vector<std::vector<double>> slices;
  std::vector<double> log_scale;
};

Forward forward(int d, const DisorderLaw& law, double beta, int N, std::uint64_t seed, std::uint64_t replica,
                bool keep) {
  const auto& k = simd::active();
  const double lam = law.log_mgf(beta);
  const double step = 1.0 / (2.0 * d);
  Forward out;
  std::vector<double> cur{1.0}, next, tmp, w;
  double L = 0.0;
  if (keep) {
    out.slices.push_back(cur);
    out.log_scale.push_back(0.0);
  }
  for (int n = 1; n <= N; ++n) {
    spread(d, n, cur, next, tmp);
    const EnvSlice env = env_slice(law, d, n, seed, replica);
    w.resize(env.values.size());
    k.exp_affine(env.values.data(), w.data(), w.size(), beta, -lam);
    k.mul_scaled(next.data(), w.data(), next.data(), next.size(), step);
    L += renormalize(next);
    cur.swap(next);
    if (keep) {
      out.slices.push_back(cur);
      out.log_scale.push_back(L);
    }
  }
  if (!keep) {
    out.slices.push_back(std::move(cur));
    out.log_scale.push_back(L);
  }
  return out;
}

}  // namespace

EnvSlice env_slice(const DisorderLaw& law, int d, int time, std::uint64_t seed, std::uint64_t replica) {
  EnvSlice s;
  s.d = d;
  s.time = time;
  s.stream = stream_id({kTagZd, std::uint64_t(d), replica, std::uint64_t(time)});
  s.values = sample_stream(law, seed, s.stream, slice_size(d, time));
  return s;
}

TransferResult transfer_partition(int d, const DisorderLaw& law, double beta, int N, std::uint64_t seed,
                                  std::uint64_t replica) {
  check_size(d, N);
  Forward f = forward(d, law, beta, N, seed, replica, false);
  TransferResult r;
  r.endpoint = std::move(f.slices.back());
  r.log_scale = f.log_scale.back();
  const double s = simd::active().sum(r.endpoint.data(), r.endpoint.size());
  // With beta = 0 every weight is 1 and the normalized walk has total mass 1.
  r.log_W = beta == 0.0 ? 0.0 : r.log_scale + std::log(s);
  return r;
}

ZdFreeEnergy quenched_free_energy_zd(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                     std::uint64_t seed) {
  check_size(d, N);
  if (N < 1) throw BadParams("N must be >= 1");
  if (replicas < 2) throw BadParams("need at least 2 replicas");
  ZdFreeEnergy out;
  out.log_W.resize(replicas);
  parallel_for(std::size_t(replicas),
               [&](std::size_t r) { out.log_W[r] = transfer_partition(d, law, beta, N, seed, r).log_W; });
  std::vector<double> p(replicas);
  for (int r = 0; r < replicas; ++r) p[r] = out.log_W[r] / N;
  const auto ms = mean_stderr(p);
  out.estimate = {ms.mean, ms.stderr_, std::size_t(replicas), seed, "zd d=" + std::to_string(d), beta, 0.0, N};
  out.annealed_compatible = out.estimate.lower(3.0) <= 0.0;
  return out;
}

double overlap(int d, const DisorderLaw& law, double beta, int N, std::uint64_t seed, std::uint64_t replica) {
  check_size(d, N);
  if (N == 0) return 0.0;
  const auto& k = simd::active();
  const double lam = law.log_mgf(beta);
  const Forward f = forward(d, law, beta, N, seed, replica, true);
  std::vector<double> b(slice_size(d, N), 1.0), c, prev, tmp, w;
  double total = 0.0;
  for (int n = N;; --n) {
    const auto& fn = f.slices[n];
    const double z = k.dot(fn.data(), b.data(), fn.size());
    double q = 0.0;
    for (std::size_t i = 0; i < fn.size(); ++i) {
      const double mu = fn[i] * b[i] / z;
      q += mu * mu;
    }
    total += q;
    if (n == 1) break;
    // b_{n-1}(z) = (2d)^{-1} sum over children y of w_n(y) b_n(y).
    const EnvSlice env = env_slice(law, d, n, seed, replica);
    w.resize(env.values.size());
    k.exp_affine(env.values.data(), w.data(), w.size(), beta, -lam);
    c.resize(b.size());
    k.mul_scaled(b.data(), w.data(), c.data(), b.size(), 1.0 / (2.0 * d));
    gather(d, n, c, prev, tmp);
    renormalize(prev);
    b.swap(prev);
  }
  return total;
}

OverlapCheck overlap_and_derivative_check(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                          double eps, std::uint64_t seed, double z) {
  if (!standard_gaussian(law)) throw NonGaussianLaw("overlap identity requires standard Gaussian disorder");
  if (!(eps > 0.0 && eps < beta / 2.0)) throw BadParams("eps must lie in (0, beta/2)");
  check_size(d, N);
  if (N < 1) throw BadParams("N must be >= 1");
  if (replicas < 2) throw BadParams("need at least 2 replicas");
  std::vector<double> I(replicas), fd(replicas), fd2(replicas), pred(replicas), disc(replicas);
  parallel_for(std::size_t(replicas), [&](std::size_t r) {
    auto lw = [&](double b) { return transfer_partition(d, law, b, N, seed, r).log_W; };
    const double up = lw(beta + eps), dn = lw(beta - eps);
    const double up2 = lw(beta + 2 * eps), dn2 = lw(beta - 2 * eps);
    I[r] = overlap(d, law, beta, N, seed, r);
    fd[r] = (up - dn) / (2 * eps * N);
    fd2[r] = (up2 - dn2) / (4 * eps * N);
    pred[r] = -beta * I[r] / N;
    disc[r] = fd[r] - pred[r];
  });
  auto est = [&](const std::vector<double>& v) {
    const auto ms = mean_stderr(v);
    return Estimate{ms.mean, ms.stderr_, std::size_t(replicas), seed, "zd d=" + std::to_string(d), beta, 0.0, N};
  };
  OverlapCheck out;
  out.overlap = est(I);
  out.derivative = est(fd);
  out.predicted = est(pred);
  out.discrepancy = est(disc);
  // Central differences at eps and 2 eps differ by 3 eps^2 p'''/6.
  std::vector<double> rich(replicas);
  for (int r = 0; r < replicas; ++r) rich[r] = (fd2[r] - fd[r]) / 3.0;
  const auto rb = mean_stderr(rich);
  out.bias_estimate = rb.mean;
  out.within_budget = std::abs(out.discrepancy.value) <= z * out.discrepancy.stderr_ + std::abs(rb.mean) + z * rb.stderr_;
  return out;
}

double second_moment_exact(int d, const DisorderLaw& law, double beta, int N) {
  check_size(d, N);
  const double g = gamma_two_replica(law, beta);
  const auto& k = simd::active();
  // Difference of two walks, halved: per rotated axis a lazy walk with steps
  // -1, 0, +1 taken with probability 1/4, 1/2, 1/4.
  auto lazy1 = [&](const double* in, double* out, std::size_t n, std::vector<double>& t) {
    t.resize(n + 1);
    k.pair_sum(in, t.data(), n);
    k.pair_sum(t.data(), out, n + 1);
  };
  std::vector<double> cur{1.0}, next, t, rows;
  double L = 0.0;
  std::size_t side = 1;
  for (int n = 1; n <= N; ++n) {
    const std::size_t ns = side + 2;
    if (d == 1) {
      next.resize(ns);
      lazy1(cur.data(), next.data(), side, t);
      k.scale(next.data(), ns, 0.25);
    } else {
      rows.assign(side * ns, 0.0);
      for (std::size_t i = 0; i < side; ++i) lazy1(cur.data() + i * side, rows.data() + i * ns, side, t);
      next.assign(ns * ns, 0.0);
      std::vector<double> col(side), out(ns);
      for (std::size_t j = 0; j < ns; ++j) {
        for (std::size_t i = 0; i < side; ++i) col[i] = rows[i * ns + j];
        lazy1(col.data(), out.data(), side, t);
        for (std::size_t i = 0; i < ns; ++i) next[i * ns + j] = out[i];
      }
      k.scale(next.data(), next.size(), 1.0 / 16.0);
    }
    const std::size_t centre = d == 1 ? ns / 2 : (ns / 2) * ns + ns / 2;
    next[centre] *= std::exp(g);
    L += renormalize(next);
    cur.swap(next);
    side = ns;
  }
  return std::exp(L) * k.sum(cur.data(), cur.size());
}

SecondMomentCheck second_moment_crosscheck(int d, const DisorderLaw& law, double beta, int N, int replicas,
                                           std::uint64_t seed) {
  check_size(d, N);
  if (replicas < 2) throw BadParams("need at least 2 replicas");
  law.log_mgf(2.0 * beta);
  std::vector<double> w2(replicas);
  parallel_for(std::size_t(replicas),
               [&](std::size_t r) { w2[r] = std::exp(2.0 * transfer_partition(d, law, beta, N, seed, r).log_W); });
  const auto ms = mean_stderr(w2);
  SecondMomentCheck out;
  out.mc = {ms.mean, ms.stderr_, std::size_t(replicas), seed, "zd d=" + std::to_string(d), beta, 0.0, N};
  out.exact = second_moment_exact(d, law, beta, N);
  out.agrees = std::abs(out.mc.value - out.exact) <= 4.0 * out.mc.stderr_;
  return out;
}

}  // namespace diamondlab
