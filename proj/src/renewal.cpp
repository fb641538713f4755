#include "diamondlab/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "diamondlab/critical.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/parallel.hpp"
#include "diamondlab/rng.hpp"
#include "diamondlab/simd/kernels.hpp"

namespace diamondlab {
namespace {

constexpr std::uint64_t kTagRenewal = 0x72656e77;  // "renw"
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& a) {
  double m = -kInf;
  for (double v : a) m = std::max(m, v);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

// Integral of f over [a, inf) for a positive, decreasing, integrable f.
template <class F>
double tail_integral(F f, double a) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  if (f(a) == 0.0) return 0.0;
  return integrator.integrate(f, a, std::numeric_limits<double>::infinity(), 1e-13);
}

// power_law profile n^{-(1+alpha)} log(1+n)^b.
double power_profile(double t, double alpha, double b) {
  double v = std::pow(t, -(1.0 + alpha));
  if (b != 0.0) v *= std::pow(std::log1p(t), b);
  return v;
}

// Bounds on C(2n, n) / 4^n from the two-sided Stirling remainder
// 1/(12n) - 1/(360n^3) < r(n) < 1/(12n): the log of the ratio lies within
// -log(pi n)/2 - 1/(8n) + c/n^3 for c in (-1/2880, 1/180).
double srw_ratio_bound(double t, double c) {
  return std::exp(-0.5 * std::log(std::numbers::pi * t) - 0.125 / t + c / (t * t * t));
}

// C(2n, n) / 4^n past the stored range, from the asymptotic series; the
// neglected terms are O(n^-5).
double central_binomial_ratio(double n) { return srw_ratio_bound(n, 1.0 / 192.0); }

}  // namespace

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::geometric: return "geometric";
    case KernelKind::srw_return: return "srw_return";
    case KernelKind::power_law: return "power_law";
    case KernelKind::custom: return "custom";
  }
  return "?";
}

RenewalKernel make_kernel(const KernelSpec& spec) {
  RenewalKernel K;
  K.spec_ = spec;
  const std::size_t N = RenewalKernel::kStored;
  if (spec.kind != KernelKind::custom && !(spec.mass > 0.0 && spec.mass <= 1.0))
    throw BadParams("kernel mass must lie in (0, 1]");

  switch (spec.kind) {
    case KernelKind::geometric: {
      if (!(spec.q > 0.0 && spec.q < 1.0)) throw BadParams("geometric kernel needs q in (0, 1)");
      K.values_.resize(N);
      double v = spec.mass * (1.0 - spec.q);
      for (std::size_t n = 0; n < N; ++n, v *= spec.q) K.values_[n] = v;
      K.mass_ = spec.mass;
      K.alpha_ = kInf;
      K.envelope_ = K.values_[0];
      break;
    }
    case KernelKind::srw_return: {
      K.values_.resize(N);
      double u = 1.0;
      for (std::size_t n = 1; n <= N; ++n) {
        u *= (2.0 * n - 1.0) / (2.0 * n);
        K.values_[n - 1] = spec.mass * u / (2.0 * n - 1.0);
      }
      K.mass_ = spec.mass;
      K.alpha_ = 0.5;
      break;
    }
    case KernelKind::power_law: {
      if (!(spec.alpha > 0.0)) throw BadParams("power_law kernel needs alpha > 0");
      if (std::abs(spec.log_power) > 4.0) throw BadParams("power_law log exponent must satisfy |b| <= 4");
      const double a = spec.alpha, b = spec.log_power;
      K.values_.resize(N);
      // Sum from the smallest terms up.
      double head = 0.0;
      for (std::size_t n = N; n >= 1; --n) {
        K.values_[n - 1] = power_profile(double(n), a, b);
        head += K.values_[n - 1];
      }
      double total;
      if (b == 0.0) {
        total = boost::math::zeta(1.0 + a);
      } else {
        auto g = [&](double t) { return power_profile(t, a, b); };
        const double Nd = double(N);
        const double lo = tail_integral(g, Nd) - 0.5 * g(Nd);
        const double hi = tail_integral(g, Nd + 0.5);
        total = head + 0.5 * (lo + hi);
      }
      K.norm_ = spec.mass / total;
      for (double& v : K.values_) v *= K.norm_;
      K.mass_ = spec.mass;
      K.alpha_ = a;
      break;
    }
    case KernelKind::custom: {
      if (spec.table.empty()) throw BadParams("custom kernel table is empty");
      double total = 0.0;
      for (double v : spec.table) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw BadParams("custom kernel values must be finite and >= 0");
        total += v;
      }
      if (total > 1.0 + 1e-12) throw BadParams("custom kernel mass exceeds 1");
      K.values_ = spec.table;
      K.mass_ = std::min(total, 1.0);
      K.alpha_ = kInf;
      K.envelope_ = *std::max_element(K.values_.begin(), K.values_.end());
      break;
    }
  }

  if (K.alpha_ < kInf) {
    // Stored range, then the first point beyond it, where the ratio of the
    // true envelope to the profile is largest.
    double c = 0.0;
    for (std::size_t n = 1; n <= K.values_.size(); ++n)
      c = std::max(c, K.values_[n - 1] / power_profile(double(n), K.alpha_, K.spec_.log_power));
    const double t = double(K.values_.size() + 1);
    c = std::max(c, K.envelope_hi(t, 1.0, 0.0) / power_profile(t, K.alpha_, K.spec_.log_power));
    K.envelope_ = c;
  }

  // Suffix sums, smallest terms first.
  const std::size_t S = K.values_.size();
  K.survival_.assign(S + 1, 0.0);
  double beyond = 0.0;
  if (spec.kind != KernelKind::custom) {
    const Interval t = K.tail_sum(S);
    beyond = 0.5 * (t.lo + t.hi);
  }
  double acc = beyond;
  K.survival_[S] = acc;
  for (std::size_t n = S; n >= 1; --n) {
    acc += K.values_[n - 1];
    K.survival_[n - 1] = acc;
  }
  const double defect = 1.0 - K.mass_;
  for (double& v : K.survival_) v += defect;
  if (spec.kind == KernelKind::srw_return) {
    double u = 1.0;
    for (std::size_t n = 1; n <= S; ++n) {
      u *= (2.0 * n - 1.0) / (2.0 * n);
      K.survival_[n] = defect + K.mass_ * u;
    }
  } else if (spec.kind == KernelKind::geometric) {
    for (std::size_t n = 1; n <= S; ++n) K.survival_[n] = defect + K.mass_ * std::pow(spec.q, double(n));
  }
  K.survival_[0] = 1.0;
  return K;
}

double RenewalKernel::operator()(std::size_t n) const {
  if (n == 0) return 0.0;
  if (n <= values_.size()) return values_[n - 1];
  switch (spec_.kind) {
    case KernelKind::geometric: return mass_ * (1.0 - spec_.q) * std::pow(spec_.q, double(n - 1));
    case KernelKind::srw_return: return mass_ * central_binomial_ratio(double(n)) / (2.0 * double(n) - 1.0);
    case KernelKind::power_law: return norm_ * power_profile(double(n), spec_.alpha, spec_.log_power);
    case KernelKind::custom: return 0.0;
  }
  return 0.0;
}

double RenewalKernel::envelope_lo(double t, double gamma, double x) const {
  double base;
  if (spec_.kind == KernelKind::srw_return)
    base = mass_ * srw_ratio_bound(t, -1.0 / 2880.0) / (2.0 * t - 1.0);
  else
    base = norm_ * power_profile(t, spec_.alpha, spec_.log_power);
  return std::pow(base, gamma) * std::exp(-t * x);
}

double RenewalKernel::envelope_hi(double t, double gamma, double x) const {
  double base;
  if (spec_.kind == KernelKind::srw_return)
    base = mass_ * srw_ratio_bound(t, 1.0 / 180.0) / (2.0 * t - 1.0);
  else
    base = norm_ * power_profile(t, spec_.alpha, spec_.log_power);
  return std::pow(base, gamma) * std::exp(-t * x);
}

Interval RenewalKernel::tail_sum(std::size_t N, double gamma, double x) const {
  if (!(gamma > 0.0)) throw BadParams("tail exponent must be positive");
  if (!(x >= 0.0)) throw BadParams("tail damping must be >= 0");
  switch (spec_.kind) {
    case KernelKind::geometric: {
      const double c = mass_ * (1.0 - spec_.q);
      const double log_r = gamma * std::log(spec_.q) - x;
      const double v = std::exp(gamma * (std::log(c) - std::log(spec_.q)) + double(N + 1) * log_r) /
                       -std::expm1(log_r);
      return {v, v};
    }
    case KernelKind::custom: {
      double v = 0.0;
      for (std::size_t n = values_.size(); n > N; --n)
        v += std::pow(values_[n - 1], gamma) * std::exp(-double(n) * x);
      return {v, v};
    }
    case KernelKind::srw_return:
    case KernelKind::power_law: break;
  }
  if (gamma * (1.0 + alpha_) <= 1.0 && x == 0.0) return {kInf, kInf};

  double head = 0.0;
  for (std::size_t n = values_.size(); n > N; --n)
    head += std::pow(values_[n - 1], gamma) * std::exp(-double(n) * x);
  // Beyond the stored range the envelopes are convex and decreasing, so the
  // midpoint rule bounds the sum from above and the trapezoid rule from below.
  const double M = double(std::max(N, values_.size()));
  auto lo_f = [&](double t) { return envelope_lo(t, gamma, x); };
  auto hi_f = [&](double t) { return envelope_hi(t, gamma, x); };
  const double lo = std::max(0.0, tail_integral(lo_f, M) - 0.5 * lo_f(M));
  const double hi = tail_integral(hi_f, M + 0.5);
  return {head + lo, head + hi};
}

Interval RenewalKernel::series(double gamma, double x, std::size_t N) const {
  N = std::min(N, values_.size());
  double head;
  if (gamma == 1.0) {
    head = simd::active().exp_weighted_sum(values_.data(), N, x, 1.0);
  } else {
    head = 0.0;
    for (std::size_t n = 1; n <= N; ++n) head += std::pow(values_[n - 1], gamma) * std::exp(-double(n) * x);
  }
  const Interval t = tail_sum(N, gamma, x);
  return {head + t.lo, head + t.hi};
}

double RenewalKernel::survival(std::size_t n) const {
  if (n < survival_.size()) return survival_[n];
  if (spec_.kind == KernelKind::custom) return 1.0 - mass_;
  if (spec_.kind == KernelKind::srw_return) return 1.0 - mass_ + mass_ * central_binomial_ratio(double(n));
  const Interval t = tail_sum(n);
  return 1.0 - mass_ + 0.5 * (t.lo + t.hi);
}

std::string RenewalKernel::describe() const {
  std::ostringstream os;
  os << to_string(spec_.kind);
  switch (spec_.kind) {
    case KernelKind::geometric: os << "(q=" << spec_.q << ")"; break;
    case KernelKind::power_law: os << "(alpha=" << spec_.alpha << ", b=" << spec_.log_power << ")"; break;
    case KernelKind::custom: os << "(" << values_.size() << " values)"; break;
    case KernelKind::srw_return: break;
  }
  if (mass_ < 1.0) os << " mass=" << mass_;
  return os.str();
}

double renewal_critical_point(const RenewalKernel& K) { return -std::log(K.total_mass()); }

CertifiedValue homogeneous_free_energy(const RenewalKernel& K, double h, double tol) {
  if (!(tol > 0.0)) throw BadParams("tol must be positive");
  if (!std::isfinite(h)) throw BadParams("h must be finite");
  const double hc = renewal_critical_point(K);
  if (h <= hc) return {0.0, 0.0, 0};
  const double target = std::exp(-h);
  const std::size_t stored = K.stored().size();
  const double defect = 1.0 - K.total_mass();

  // Truncation depth for damping x: the first power of two whose remaining
  // mass, damped, is below tol / 10.
  auto depth = [&](double x) {
    std::size_t N = std::min<std::size_t>(64, stored);
    while (N < stored && std::exp(-double(N) * x) * (K.survival(N) - defect) >= 0.1 * tol) N *= 2;
    return std::min(N, stored);
  };
  auto bounds = [&](double x) { return K.series(1.0, x, depth(x)); };

  // sum K(n) e^{-nx} <= mass e^{-x}, so the root lies below h - h_c.
  double a_hi = 0.0, b_hi = (h - hc) * (1.0 + 1e-12) + 1e-300;
  while (!(bounds(b_hi).hi < target)) b_hi *= 2.0;
  double a_lo = 0.0, b_lo = b_hi;
  int it = 0;
  for (; it < 400 && (b_hi - a_hi > 0.25 * tol || b_lo - a_lo > 0.25 * tol); ++it) {
    if (b_hi - a_hi > 0.25 * tol) {
      const double m = 0.5 * (a_hi + b_hi);
      (bounds(m).hi < target ? b_hi : a_hi) = m;
    }
    if (b_lo - a_lo > 0.25 * tol) {
      const double m = 0.5 * (a_lo + b_lo);
      (bounds(m).lo > target ? a_lo : b_lo) = m;
    }
  }
  CertifiedValue out{a_lo, b_hi, it};
  if (out.width() > tol) {
    std::ostringstream os;
    os << "renewal free energy at h=" << h << ": certified width " << out.width() << " exceeds tol " << tol;
    throw ToleranceNotReached(os.str());
  }
  return out;
}

namespace {

std::vector<double> log_kernel_table(const RenewalKernel& K, std::size_t N) {
  std::vector<double> lk(N + 1, -kInf);
  for (std::size_t n = 1; n <= N; ++n) {
    const double v = K(n);
    lk[n] = v > 0.0 ? std::log(v) : -kInf;
  }
  return lk;
}

// log Z_n = reward_n + logsumexp_m (log Z_m + log K(n - m)).
template <class Reward>
std::vector<double> pinned_dp(const std::vector<double>& lk, std::size_t N, Reward reward) {
  std::vector<double> lz(N + 1, -kInf), terms;
  lz[0] = 0.0;
  terms.reserve(N);
  for (std::size_t n = 1; n <= N; ++n) {
    terms.clear();
    for (std::size_t m = 0; m < n; ++m) terms.push_back(lz[m] + lk[n - m]);
    lz[n] = reward(n) + log_sum_exp(terms);
  }
  return lz;
}

}  // namespace

std::vector<double> homogeneous_log_partition(const RenewalKernel& K, double h, std::size_t N, bool free_endpoint) {
  const auto lk = log_kernel_table(K, N);
  auto lz = pinned_dp(lk, N, [h](std::size_t) { return h; });
  if (!free_endpoint) return lz;
  std::vector<double> ls(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    const double s = K.survival(n);
    ls[n] = s > 0.0 ? std::log(s) : -kInf;
  }
  std::vector<double> out(N + 1), terms;
  for (std::size_t n = 0; n <= N; ++n) {
    terms.clear();
    for (std::size_t m = 0; m <= n; ++m) terms.push_back(lz[m] + ls[n - m]);
    out[n] = log_sum_exp(terms);
  }
  return out;
}

std::vector<double> quenched_log_partition(const RenewalKernel& K, std::span<const double> omega, double beta,
                                           double h) {
  const std::size_t N = omega.size();
  const auto lk = log_kernel_table(K, N);
  return pinned_dp(lk, N, [&](std::size_t n) { return beta * omega[n - 1] + h; });
}

std::vector<double> renewal_environment(const DisorderLaw& law, std::size_t N, std::uint64_t seed,
                                        std::uint64_t replica) {
  return sample_stream(law, seed, stream_id({kTagRenewal, replica}), N);
}

QuenchedSummary quenched_summary(const RenewalKernel& K, const DisorderLaw& law, double beta, double h,
                                 std::size_t N, std::size_t replicas, std::uint64_t seed) {
  if (N < 1) throw BadParams("N must be >= 1");
  if (replicas < 2) throw BadParams("need at least 2 replicas");
  const double lam = law.log_mgf(beta);
  const auto lk = log_kernel_table(K, N);
  QuenchedSummary out;
  out.log_samples.resize(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    const auto omega = renewal_environment(law, N, seed, r);
    out.log_samples[r] = pinned_dp(lk, N, [&](std::size_t n) { return beta * omega[n - 1] + h; })[N];
  });
  std::vector<double> z(replicas), l(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    z[r] = std::exp(out.log_samples[r]);
    l[r] = out.log_samples[r] / double(N);
  }
  const auto mz = mean_stderr(z);
  const auto ml = mean_stderr(l);
  const std::string model = "renewal " + K.describe();
  out.mean_partition = {mz.mean, mz.stderr_, replicas, seed, model, beta, h, int(N)};
  out.log_partition = {ml.mean, ml.stderr_, replicas, seed, model, beta, h, int(N)};
  out.annealed_log_partition = pinned_dp(lk, N, [&](std::size_t) { return h + lam; })[N];
  return out;
}

TiltedAnnealed tilted_annealed(const RenewalKernel& K, const DisorderLaw& law, double beta, double h, double tilt,
                               std::size_t N) {
  TiltedAnnealed out;
  out.h_eff = h + law.log_mgf(beta - tilt) - law.log_mgf(-tilt);
  out.log_partition = homogeneous_log_partition(K, out.h_eff, N).back();
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw BadParams("geometric grid needs 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, double(i) / double(count - 1));
  return g;
}

AsymptoticsCheck critical_asymptotics_check(const RenewalKernel& K, std::span<const double> offsets,
                                            std::uint64_t seed, int bootstrap_rounds) {
  if (offsets.size() < 8) throw BadParams("asymptotics grid needs at least 8 points");
  for (double d : offsets)
    if (!(d > 0.0 && d <= 0.1)) throw BadParams("asymptotics offsets must lie in (0, 0.1]");
  AsymptoticsCheck out;
  out.reference = std::max(1.0, 1.0 / K.alpha());
  const double hc = renewal_critical_point(K);
  for (double d : offsets) {
    const double tol = 1e-9 * std::pow(d, out.reference);
    const auto F = homogeneous_free_energy(K, hc + d, tol);
    out.h.push_back(hc + d);
    out.F.push_back(F.midpoint());
  }
  const auto fit = exponent_fit(offsets, out.F, bootstrap_rounds, seed);
  out.slope = fit.slope;
  out.ci_lo = fit.ci_lo;
  out.ci_hi = fit.ci_hi;
  return out;
}

}  // namespace diamondlab
