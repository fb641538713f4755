#include "diamondlab/hier_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diamondlab/errors.hpp"

namespace diamondlab {
namespace {

constexpr double kLinearLimit = 1e6;

double logaddexp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void require_pinning(const DiamondParams& p) {
  p.validate();
  if (p.model != ModelKind::pinning) throw UnsupportedModel("annealed map is defined for pinning models only");
}

// Log-prefactor c of the map r -> (e^c r^s + b - 1)/b and the starting point.
double map_prefactor(const DiamondParams& p, double h) {
  return p.placement == Placement::site ? (p.s - 1) * h : 0.0;
}
double start_point(const DiamondParams& p, double h) { return p.placement == Placement::site ? 1.0 : std::exp(h); }

// g(x) = e^c x^s - b x + b - 1; the map increases x exactly where g(x) > 0.
double g_value(double c, double b, int s, double x) { return std::exp(c) * std::pow(x, s) - b * x + b - 1.0; }
double g_argmin(double c, double b, int s) { return std::pow(b / (s * std::exp(c)), 1.0 / (s - 1)); }

// Largest root of g, assuming g(argmin) <= 0.
double largest_fixed_point(double c, double b, int s) {
  double lo = g_argmin(c, b, s);
  double hi = std::max(lo, 1.0);
  while (g_value(c, b, s, hi) <= 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g_value(c, b, s, mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Law of log(X Y) or log(X + Y) for independent X, Y given the laws of log X
// and log Y.
enum class Op { mul, add };

Rule combine(const Rule& x, const Rule& y, Op op, bool gaussian, int order, std::size_t cap) {
  const std::size_t total = x.size() * y.size();
  if (!gaussian && total > cap) throw TooLarge("exact enumeration exceeds the atom cap");
  std::vector<double> nodes(total), weights(total);
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j, ++k) {
      nodes[k] = op == Op::mul ? x.nodes[i] + y.nodes[j] : logaddexp(x.nodes[i], y.nodes[j]);
      weights[k] = x.weights[i] * y.weights[j];
    }
  if (gaussian) return reduce_measure(nodes, weights, order);
  Rule merged = merge_atoms(nodes, weights);
  if (merged.size() > cap) throw TooLarge("exact enumeration exceeds the atom cap");
  return merged;
}

// log((e^L + shift) / b) applied to every node.
Rule log_affine(Rule r, double log_b, double shift) {
  for (auto& x : r.nodes) x = (shift > 0.0 ? logaddexp(x, std::log(shift)) : x) - log_b;
  return r;
}

}  // namespace

std::string to_string(Placement p) { return p == Placement::bond ? "bond" : "site"; }
std::string to_string(ModelKind m) { return m == ModelKind::pinning ? "pinning" : "polymer"; }

void DiamondParams::validate() const {
  if (s < 2) throw BadParams("s must be an integer >= 2");
  if (!std::isfinite(b)) throw BadParams("b must be finite");
  if (model == ModelKind::pinning) {
    if (!(b > 1.0)) throw BadParams("pinning requires b > 1");
  } else {
    if (b < 2.0 || b != std::floor(b)) throw BadParams("polymer requires integer b >= 2");
  }
}

std::string DiamondParams::describe() const {
  std::ostringstream os;
  os << to_string(placement) << "-" << to_string(model) << "(b=" << b << ", s=" << s << ")";
  return os.str();
}

double AnnealedOrbit::r(std::size_t k) const { return std::exp(log_r.at(k)); }

AnnealedOrbit annealed_iterate(const DiamondParams& p, double h, int n) {
  require_pinning(p);
  if (n < 0) throw BadParams("n must be >= 0");
  const double c = map_prefactor(p, h);
  const double ec = std::exp(c);
  const double b = p.b;
  const double log_bm1 = std::log(b - 1.0);
  const double log_b = std::log(b);
  AnnealedOrbit orbit;
  orbit.log_r.reserve(n + 1);
  double r = start_point(p, h);
  double lr = p.placement == Placement::site ? 0.0 : h;
  bool linear = r <= kLinearLimit;
  orbit.log_r.push_back(lr);
  for (int k = 0; k < n; ++k) {
    if (linear) {
      r = (ec * std::pow(r, p.s) + b - 1.0) / b;
      linear = r <= kLinearLimit;
      lr = std::log(r);
    } else {
      lr = logaddexp(c + p.s * lr, log_bm1) - log_b;
    }
    orbit.log_r.push_back(lr);
  }
  return orbit;
}

bool annealed_diverges(const DiamondParams& p, double h) {
  require_pinning(p);
  const double c = map_prefactor(p, h);
  const double r0 = start_point(p, h);
  if (!std::isfinite(r0)) return true;
  const double xm = g_argmin(c, p.b, p.s);
  if (g_value(c, p.b, p.s, xm) > 0.0) return true;
  return r0 > xm && g_value(c, p.b, p.s, r0) > 0.0;
}

CertifiedValue annealed_free_energy(const DiamondParams& p, double h, double tol, int max_iter) {
  require_pinning(p);
  if (!(tol > 0.0)) throw BadParams("tol must be positive");
  if (!annealed_diverges(p, h)) return {0.0, 0.0, 0};

  // F = s^-n [log r_n + (c - log b)/(s-1)] + sum_{k>=n} s^-(k+1) eps_k with
  // eps_k = log(1 + (b-1) e^-c r_k^-s), and eps_k decreasing along a divergent orbit.
  const double c = map_prefactor(p, h);
  const double b = p.b;
  const int s = p.s;
  const double log_bm1 = std::log(b - 1.0);
  const double log_b = std::log(b);
  double lr = p.placement == Placement::site ? 0.0 : h;
  double weight = 1.0;  // s^-n
  CertifiedValue out;
  for (int n = 0; n <= max_iter; ++n) {
    const double eps = std::log1p(std::exp(log_bm1 - c - s * lr));
    const double lower = weight * (lr + (c - log_b) / (s - 1));
    const double upper = lower + weight * eps / (s - 1);
    out = {std::max(lower, 0.0), std::max(upper, 0.0), n};
    if (out.width() <= tol && lower > 0.0) return out;
    if (weight == 0.0) break;
    lr = logaddexp(c + s * lr, log_bm1) - log_b;
    weight /= s;
  }
  std::ostringstream os;
  os << "annealed free energy sandwich did not close: width " << out.width() << " after " << out.iterations
     << " iterations";
  throw ToleranceNotReached(os.str());
}

double annealed_critical_point(const DiamondParams& p) {
  require_pinning(p);
  const double b = p.b;
  const int s = p.s;
  if (p.placement == Placement::bond) {
    // Fixed points of r -> (r^s + b - 1)/b are 1 and the root of sum_{k=1}^{s-1} r^k = b - 1.
    double rstar;
    if (s == 2) {
      rstar = b - 1.0;
    } else {
      auto poly = [&](double r) {
        double acc = 0.0, pw = 1.0;
        for (int k = 1; k < s; ++k) acc += (pw *= r);
        return acc - (b - 1.0);
      };
      double lo = 0.0, hi = std::max(1.0, b);
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (poly(mid) > 0.0 ? hi : lo) = mid;
      }
      rstar = 0.5 * (lo + hi);
    }
    return std::log(std::max(1.0, rstar));
  }
  if (b < s) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (!annealed_diverges(p, hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (annealed_diverges(p, mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha_exponent(const DiamondParams& p) {
  require_pinning(p);
  const double hc = annealed_critical_point(p);
  const double c = map_prefactor(p, hc);
  const double b = p.b;
  const int s = p.s;
  double rc;
  if (p.placement == Placement::bond) {
    rc = std::exp(hc);
  } else {
    // At the critical point the orbit from 1 sits on the largest fixed point,
    // or the two fixed points merge.
    const double xm = g_argmin(c, b, s);
    if (g_value(c, b, s, xm) >= -1e-9) return 0.0;
    rc = largest_fixed_point(c, b, s);
  }
  const double slope = s * std::exp(c) * std::pow(rc, s - 1) / b;
  if (slope <= 1.0) return 0.0;
  return std::log(slope) / std::log(static_cast<double>(s));
}

double percolation_map(int b, int s, double x) { return -std::expm1(b * std::log1p(-std::pow(x, s))); }

double percolation_map_derivative(int b, int s, double x) {
  return b * std::pow(1.0 - std::pow(x, s), b - 1) * s * std::pow(x, s - 1);
}

double percolation_threshold(int b, int s, double tol) {
  if (b < 2 || s < 2) throw BadParams("percolation map needs b, s >= 2");
  if (!(tol > 0.0)) throw BadParams("tol must be positive");
  auto f = [&](double x) { return percolation_map(b, s, x) - x; };
  constexpr int kGrid = 1024;
  for (int i = 1; i < kGrid - 1; ++i) {
    double lo = double(i) / kGrid, hi = double(i + 1) / kGrid;
    if (f(lo) < 0.0 && f(hi) >= 0.0) {
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
      const double pc = 0.5 * (lo + hi);
      if (percolation_map_derivative(b, s, pc) > 1.0) return pc;
    }
  }
  throw NotFound("no unstable interior fixed point of the percolation map");
}

MomentSeries moment_recursions(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n) {
  p.validate();
  if (n < 0) throw BadParams("n must be >= 0");
  const double gam = gamma_two_replica(law, beta);
  const double b = p.b;
  const int s = p.s;
  MomentSeries out;
  if (p.model == ModelKind::pinning && p.placement == Placement::bond) {
    if (s != 2) throw UnsupportedModel("moment recursions for bond pinning are available for s = 2 only");
    double m = std::exp(h);
    double d = std::exp(2.0 * h) * std::expm1(gam);
    for (int k = 0; k <= n; ++k) {
      out.mean.push_back(m);
      out.P.push_back(m - (b - 1.0));
      out.Delta.push_back(d);
      out.Q.push_back(d / (m * m));
      const double m2 = m * m;
      d = d * (2.0 * m2 + d) / (b * b);
      m = (m2 + b - 1.0) / b;
    }
    return out;
  }
  if (p.model == ModelKind::pinning) {
    double m = 1.0, d = 0.0;
    const double e2 = std::exp((s - 1) * (gam + 2.0 * h));
    const double e1 = std::exp(2.0 * (s - 1) * h);
    for (int k = 0; k <= n; ++k) {
      out.mean.push_back(m);
      out.Delta.push_back(d);
      out.Q.push_back(d / (m * m));
      const double m2 = m * m;
      d = (std::pow(d + m2, s) * e2 - std::pow(m2, s) * e1) / (b * b);
      m = (std::exp((s - 1) * h) * std::pow(m, s) + b - 1.0) / b;
    }
    return out;
  }
  if (p.placement == Placement::site) {
    double v = 0.0;
    const double e = std::exp((s - 1) * gam);
    for (int k = 0; k <= n; ++k) {
      out.mean.push_back(1.0);
      out.v.push_back(v);
      v = (e * std::pow(v + 1.0, s) - 1.0) / b;
    }
    return out;
  }
  throw UnsupportedModel("no moment recursion for the bond-disorder polymer");
}

Rule exact_law(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n, int order) {
  p.validate();
  if (n < 0) throw BadParams("n must be >= 0");
  if (std::pow(double(p.s), n) > kExactLeafCap) throw TooLarge("s^n exceeds the exact-oracle cap of 2^14 leaves");
  const bool gaussian = law.is_gaussian();
  if (gaussian && order < 1) throw BadParams("quadrature order must be >= 1");
  constexpr std::size_t kAtomCap = std::size_t{1} << 18;

  const double lam = law.log_mgf(beta);
  const bool pinning = p.model == ModelKind::pinning;
  Rule omega;
  if (gaussian) {
    omega = gauss_hermite(order);
    for (auto& x : omega.nodes) x += law.gaussian_mean();
  } else {
    for (const auto& a : law.atoms()) {
      omega.nodes.push_back(a.value);
      omega.weights.push_back(a.weight);
    }
  }
  // Log of the disorder weight: beta omega - lambda (+ h for pinning).
  Rule weight = omega;
  for (auto& x : weight.nodes) x = beta * x - lam + (pinning ? h : 0.0);
  weight = merge_atoms(weight.nodes, weight.weights);

  const Rule one{{0.0}, {1.0}};
  Rule cur = p.placement == Placement::bond ? weight : one;
  const int s = p.s;
  const double b = p.b;
  for (int level = 0; level < n; ++level) {
    Rule branch = cur;
    for (int j = 1; j < s; ++j) {
      if (p.placement == Placement::site) branch = combine(branch, weight, Op::mul, gaussian, order, kAtomCap);
      branch = combine(branch, cur, Op::mul, gaussian, order, kAtomCap);
    }
    if (pinning) {
      cur = log_affine(std::move(branch), std::log(b), b - 1.0);
    } else {
      Rule total = branch;
      for (int i = 1; i < p.branches(); ++i) total = combine(total, branch, Op::add, gaussian, order, kAtomCap);
      cur = log_affine(std::move(total), std::log(b), 0.0);
    }
  }
  return cur;
}

SmallNResult exact_small_n(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n, int order,
                           const std::vector<double>& thetas) {
  const Rule r = exact_law(p, law, beta, h, n, order);
  SmallNResult out;
  out.support = r.size();
  out.mean_log = r.expect([](double x) { return x; });
  out.thetas = thetas;
  for (double t : thetas) out.fractional_moments.push_back(r.expect([t](double x) { return std::exp(t * x); }));
  return out;
}

}  // namespace diamondlab
