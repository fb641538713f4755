#include "diamondlab/critical.hpp"

#include <algorithm>
#include <cmath>

#include <limits>

#include "diamondlab/errors.hpp"
#include "diamondlab/hier_exact.hpp"
#include "diamondlab/rng.hpp"

namespace diamondlab {
namespace {

constexpr std::uint64_t kTagFit = 0x66697462;  // "fitb"

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  bool ok = false;
};

Line least_squares(std::span<const double> u, std::span<const double> v, std::span<const std::size_t> idx) {
  const double n = double(idx.size());
  double mu = 0.0, mv = 0.0;
  for (auto i : idx) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, suv = 0.0;
  for (auto i : idx) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  if (!(suu > 0.0)) return {};
  const double slope = suv / suu;
  return {slope, mv - slope * mu, true};
}

struct Search {
  const DiamondParams& p;
  const DisorderLaw& law;
  double beta;
  const CriticalSearchOptions& opt;
  double reference;
  int evaluations = 0;

  FreeEnergyEstimate at(double h) {
    ++evaluations;
    return free_energy_estimate(p, law, beta, h, opt.level, opt.budget);
  }
  bool zero_compatible(const FreeEnergyEstimate& fe) const {
    return fe.estimate.lower(opt.z) <= reference;
  }
  double threshold(const FreeEnergyEstimate& fe) const {
    if (opt.threshold) return *opt.threshold;
    if (fe.has_sandwich) return std::max(5.0 * fe.estimate.stderr_, 2.0 * (fe.sandwich_hi - fe.sandwich_lo));
    return std::max(5.0 * fe.estimate.stderr_, 2.0 * reference);
  }
  bool localized(const FreeEnergyEstimate& fe) const {
    return fe.estimate.value > threshold(fe) + opt.z * fe.estimate.stderr_;
  }
};

double level_reference(const DiamondParams& p, int n) {
  const double hc = annealed_critical_point(p);
  return std::pow(double(p.s), -n) * annealed_iterate(p, hc, n).log_r.back();
}

void check_options(const CriticalSearchOptions& opt) {
  if (opt.level < 1) throw BadParams("critical_point_search: level must be >= 1");
  if (!(opt.tol > 0.0)) throw BadParams("critical_point_search: tol must be positive");
  if (!(opt.z >= 0.0)) throw BadParams("critical_point_search: z must be >= 0");
}

CriticalInterval finish(Search& S, double lo, double hi, FreeEnergyEstimate flo, FreeEnergyEstimate fhi) {
  while (hi - lo > S.opt.tol) {
    const double mid = 0.5 * (lo + hi);
    FreeEnergyEstimate fm = S.at(mid);
    if (S.zero_compatible(fm)) {
      lo = mid;
      flo = std::move(fm);
    } else {
      hi = mid;
      fhi = std::move(fm);
    }
  }
  CriticalInterval out;
  out.h_lo = lo;
  out.h_hi = hi;
  out.reference = S.reference;
  out.threshold = S.threshold(fhi);
  const double se = std::max(flo.estimate.stderr_, fhi.estimate.stderr_);
  const double slope = (fhi.estimate.value - flo.estimate.value) / (hi - lo);
  out.stderr_ = se == 0.0 ? 0.0 : slope > 0.0 ? se / slope : std::numeric_limits<double>::infinity();
  out.at_lo = std::move(flo);
  out.at_hi = std::move(fhi);
  out.evaluations = S.evaluations;
  return out;
}

}  // namespace

CriticalInterval critical_point_search(const DiamondParams& p, const DisorderLaw& law, double beta, double h_left,
                                       double h_right, const CriticalSearchOptions& opt) {
  p.validate();
  if (p.model != ModelKind::pinning) throw UnsupportedModel("critical_point_search needs a pinning model");
  check_options(opt);
  if (!(h_left < h_right)) throw BracketInvalid("critical_point_search: need h_left < h_right");
  Search S{p, law, beta, opt, level_reference(p, opt.level)};
  FreeEnergyEstimate flo = S.at(h_left);
  if (!S.zero_compatible(flo)) throw BracketInvalid("critical_point_search: F at the left end is not 0-compatible");
  FreeEnergyEstimate fhi = S.at(h_right);
  if (!S.localized(fhi)) throw BracketInvalid("critical_point_search: F at the right end does not exceed the threshold");
  return finish(S, h_left, h_right, std::move(flo), std::move(fhi));
}

double shift_reference_exponent(double alpha) {
  if (!(alpha > 0.5)) throw DomainError("shift exponent needs alpha > 1/2");
  return 2.0 * alpha / (2.0 * alpha - 1.0);
}

ShiftScaling shift_scaling_experiment(const DiamondParams& p, const DisorderLaw& law, std::span<const double> betas,
                                      const CriticalSearchOptions& opt, int bootstrap_rounds) {
  p.validate();
  if (betas.size() < 5) throw BadParams("shift_scaling_experiment: need at least 5 beta values");
  for (double b : betas)
    if (!(b > 0.0)) throw BadParams("shift_scaling_experiment: beta values must be positive");
  ShiftScaling out;
  out.beta.assign(betas.begin(), betas.end());
  out.h_c0 = annealed_critical_point(p);
  out.alpha = alpha_exponent(p);
  out.marginal = std::abs(out.alpha - 0.5) < 1e-9;
  for (double beta : betas) {
    double width = 0.05;
    std::optional<CriticalInterval> found;
    for (int grow = 0; grow < 12 && !found; ++grow, width *= 2.0) {
      try {
        found = critical_point_search(p, law, beta, out.h_c0, out.h_c0 + width, opt);
      } catch (const BracketInvalid&) {
        if (grow == 11) throw;
      }
    }
    out.points.push_back(*found);
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    x.push_back(betas[i]);
    y.push_back(out.points[i].midpoint() - out.h_c0);
  }
  if (!out.marginal) {
    out.reference_exponent = shift_reference_exponent(out.alpha);
    out.fit = exponent_fit(x, y, bootstrap_rounds, opt.budget.seed);
    return out;
  }
  MarginalFit m;
  std::vector<std::size_t> all(x.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<double> ly(y.size()), u1(x.size()), u2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw BadInput("shift_scaling_experiment: non-positive shift in marginal mode");
    ly[i] = std::log(y[i]);
    u1[i] = 1.0 / x[i];
    u2[i] = u1[i] * u1[i];
  }
  const auto rms = [&](const std::vector<double>& u, const Line& l) {
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ss += std::pow(ly[i] - l.intercept - l.slope * u[i], 2);
    return std::sqrt(ss / double(u.size()));
  };
  const Line l1 = least_squares(u1, ly, all), l2 = least_squares(u2, ly, all);
  m.slope_inv_beta = l1.slope;
  m.residual_inv_beta = rms(u1, l1);
  m.slope_inv_beta2 = l2.slope;
  m.residual_inv_beta2 = rms(u2, l2);
  m.c1 = -std::numeric_limits<double>::infinity();
  m.c2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.c1 = std::max(m.c1, -x[i] * x[i] * ly[i]);
    m.c2 = std::min(m.c2, -x[i] * ly[i]);
  }
  m.bracketed = m.c2 > 0.0;
  out.marginal_fit = m;
  return out;
}

ScalingFit exponent_fit(std::span<const double> x, std::span<const double> y, int bootstrap_rounds,
                        std::uint64_t seed, double confidence) {
  if (x.size() != y.size()) throw BadInput("exponent_fit: x and y differ in length");
  if (x.size() < 4) throw BadInput("exponent_fit: need at least 4 points");
  if (!(confidence > 0.0 && confidence < 1.0)) throw BadInput("exponent_fit: confidence must lie in (0, 1)");
  const std::size_t n = x.size();
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw BadInput("exponent_fit: values must be finite and positive");
    u[i] = std::log(x[i]);
    v[i] = std::log(y[i]);
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const Line fit = least_squares(u, v, all);
  if (!fit.ok) throw BadInput("exponent_fit: all x values coincide");

  ScalingFit out;
  out.x.assign(x.begin(), x.end());
  out.y.assign(y.begin(), y.end());
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] - (fit.intercept + fit.slope * u[i]);
    ss += r * r;
  }
  out.residual = std::sqrt(ss / double(n));

  std::vector<double> slopes;
  slopes.reserve(std::max(bootstrap_rounds, 0));
  Philox rng(seed, stream_id({kTagFit}));
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < bootstrap_rounds; ++b) {
    for (auto& i : idx) i = static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
    const Line l = least_squares(u, v, idx);
    if (l.ok) slopes.push_back(l.slope);
  }
  out.ci_lo = out.ci_hi = out.slope;
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const double tail = 0.5 * (1.0 - confidence);
    const auto at = [&](double q) {
      const double pos = q * double(slopes.size() - 1);
      const std::size_t k = static_cast<std::size_t>(pos);
      const double w = pos - double(k);
      return k + 1 < slopes.size() ? (1.0 - w) * slopes[k] + w * slopes[k + 1] : slopes[k];
    };
    out.ci_lo = std::min(out.slope, at(tail));
    out.ci_hi = std::max(out.slope, at(1.0 - tail));
  }
  return out;
}

}  // namespace diamondlab
