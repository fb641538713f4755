#include "diamondlab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "diamondlab/errors.hpp"
#include "diamondlab/parallel.hpp"

namespace diamondlab {
namespace {

void decide(Certificate& c) {
  const double up = c.estimate.value + c.z * c.estimate.stderr_;
  const bool ok = c.strict ? up < c.threshold : up <= c.threshold;
  c.verdict = ok ? Verdict::certified : Verdict::inconclusive;
  c.label = c.deterministic ? "deterministic check" : "statistical certificate (z = " + std::to_string(c.z) + ")";
}

bool deterministic_pool(const DisorderLaw& law, double beta) {
  return beta == 0.0 || (!law.is_gaussian() && law.atoms().size() == 1);
}

double log_a_theta(const DisorderLaw& law, double beta, double theta) {
  return law.log_mgf(theta * beta) - theta * law.log_mgf(beta);
}

}  // namespace

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::pin_bond_deloc: return "pin-bond-deloc";
    case CertificateKind::pin_site_deloc: return "pin-site-deloc";
    case CertificateKind::polymer_strong: return "polymer-strong";
    case CertificateKind::renewal_deloc: return "renewal-deloc";
  }
  return "?";
}

std::string to_string(Verdict v) { return v == Verdict::certified ? "certified" : "inconclusive"; }

std::string to_string(PolymerRoute r) {
  switch (r) {
    case PolymerRoute::fractional_moment: return "fractional-moment";
    case PolymerRoute::closed_form: return "closed-form";
    case PolymerRoute::gaussian_large_b: return "gaussian-large-b";
  }
  return "?";
}

Certificate pin_bond_delocalization(const DisorderLaw& law, double B, double beta, double h, double gamma, int n0,
                                    const CertifyOptions& opt) {
  if (!(B > 2.0)) throw BadParams("pin-bond certificate needs B > 2");
  const double g_min = std::log(2.0) / std::log(B);
  if (!(gamma > g_min && gamma < 1.0)) {
    std::ostringstream os;
    os << "gamma must lie in (log 2 / log B, 1) = (" << g_min << ", 1)";
    throw BadExponent(os.str());
  }
  if (n0 < 0) throw BadParams("n0 must be >= 0");
  Certificate c;
  c.kind = CertificateKind::pin_bond_deloc;
  c.inputs = {{"B", B}, {"beta", beta}, {"h", h}, {"gamma", gamma}, {"n0", double(n0)},
              {"M", double(opt.budget.pool_size)}, {"replicas", double(opt.budget.replicas)}, {"z", opt.z}};
  c.z = opt.z;
  c.threshold = std::pow(B, gamma) - 2.0;
  c.deterministic = deterministic_pool(law, beta);
  c.estimate =
      fractional_moment_estimate(bond_pinning(B, 2), law, beta, h, n0, gamma, FractionalTarget::excess, opt.budget);
  decide(c);
  if (c.certified()) {
    const double Bg = std::pow(B, gamma);
    double a = c.estimate.upper(c.z);
    c.orbit.push_back(a);
    bool decreasing = true;
    for (int i = 0; i < 2000 && a > 1e-300; ++i) {
      const double next = (a * a + 2.0 * a) / Bg;
      decreasing = decreasing && next <= a;
      a = next;
      if (c.orbit.size() < 64) c.orbit.push_back(a);
    }
    c.orbit_to_zero = decreasing && a <= 1e-300;
  }
  return c;
}

std::pair<double, double> trap_points(int b, int s, double theta) {
  if (b < 2 || s < 2) throw BadParams("trap points need b >= 2 and s >= 2");
  if (!(theta > 0.0 && theta < 1.0)) throw BadExponent("theta must lie in (0, 1)");
  // g(x) <= x  <=>  phi(x) = x^s - b^theta x + (b-1)^theta <= 0, phi convex.
  const double bt = std::pow(double(b), theta), c0 = std::pow(double(b - 1), theta);
  auto phi = [&](double x) { return std::pow(x, s) - bt * x + c0; };
  const double xm = std::pow(bt / s, 1.0 / (s - 1));
  if (phi(xm) > 0.0) {
    std::ostringstream os;
    os << "no trap point for b=" << b << " s=" << s << " theta=" << theta << ": min of g(x) - x is positive";
    throw NoTrapPoint(os.str());
  }
  auto root = [&](double lo, double hi) {
    // phi(lo) and phi(hi) have opposite signs.
    const bool lo_neg = phi(lo) <= 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
      const double m = 0.5 * (lo + hi);
      ((phi(m) <= 0.0) == lo_neg ? lo : hi) = m;
    }
    return lo_neg ? lo : hi;
  };
  double hi = std::max(2.0 * xm, 1.0);
  while (phi(hi) <= 0.0) hi *= 2.0;
  const double upper = root(xm, hi);
  const double lower = phi(0.0) <= 0.0 ? 0.0 : root(0.0, xm);
  return {lower, upper};
}

Certificate pin_site_delocalization(const DisorderLaw& law, int b, int s, double beta, double h, double theta,
                                    int n, const CertifyOptions& opt) {
  if (!(b < s)) throw BadParams("pin-site certificate requires b < s");
  if (!(theta > 0.0 && theta < 1.0)) throw BadExponent("theta must lie in (0, 1)");
  if (n < 0) throw BadParams("n must be >= 0");
  const double side = law.log_mgf(theta * beta) - theta * law.log_mgf(beta) + theta * h;
  if (side > 0.0) {
    std::ostringstream os;
    os << "side condition E[A^theta] <= 1 fails: log E[A^theta] = " << side;
    throw SideConditionFailed(os.str());
  }
  const auto [x_lo, x_theta] = trap_points(b, s, theta);
  Certificate c;
  c.kind = CertificateKind::pin_site_deloc;
  c.inputs = {{"b", double(b)}, {"s", double(s)}, {"beta", beta}, {"h", h}, {"theta", theta}, {"n", double(n)},
              {"M", double(opt.budget.pool_size)}, {"replicas", double(opt.budget.replicas)}, {"z", opt.z}};
  c.z = opt.z;
  c.threshold = x_theta;
  c.deterministic = deterministic_pool(law, beta);
  c.extras = {{"trap_lower", x_lo}, {"trap_upper", x_theta}, {"log_side_condition", side}};
  c.estimate = fractional_moment_estimate(site_pinning(b, s), law, beta, h, n, theta, FractionalTarget::power,
                                          opt.budget);
  decide(c);
  return c;
}

std::pair<double, double> optimize_theta(const DisorderLaw& law, int b, int s, double beta) {
  const double L = std::log(double(b)) / (s - 1);
  auto f = [&](double t) { return (log_a_theta(law, beta, t) + (1.0 - t) * L) / t; };
  double best_t = 0.02, best = f(0.02);
  for (int i = 2; i <= 49; ++i) {
    const double t = 0.02 * i;
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  double lo = std::max(1e-6, best_t - 0.02), hi = std::min(1.0 - 1e-9, best_t + 0.02);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  const double v = f(t);
  return v < best ? std::pair{t, v} : std::pair{best_t, best};
}

Certificate polymer_strong_disorder(const DisorderLaw& law, int b, int s, double beta, PolymerRoute route,
                                    std::optional<double> theta, int n, const CertifyOptions& opt) {
  site_polymer(b, s).validate();
  if (theta && !(*theta > 0.0 && *theta <= 1.0)) throw BadExponent("theta must lie in (0, 1]");
  const double L = std::log(double(b)) / (s - 1);
  Certificate c;
  c.kind = CertificateKind::polymer_strong;
  c.route = to_string(route);
  c.z = opt.z;
  c.inputs = {{"b", double(b)}, {"s", double(s)}, {"beta", beta}};

  switch (route) {
    case PolymerRoute::closed_form: {
      double t, rate;
      if (theta) {
        t = *theta;
        rate = (log_a_theta(law, beta, t) + (1.0 - t) * L) / t;
      } else {
        std::tie(t, rate) = optimize_theta(law, b, s, beta);
      }
      c.inputs.emplace_back("theta", t);
      c.estimate.value = std::exp(log_a_theta(law, beta, t));
      c.threshold = std::exp((t - 1.0) * L);
      c.deterministic = true;
      c.z = 0.0;
      decide(c);
      if (c.certified()) c.witness = rate;
      break;
    }
    case PolymerRoute::gaussian_large_b: {
      if (!law.is_gaussian()) throw NonGaussianLaw("route gaussian-large-b needs Gaussian disorder");
      if (!(b > s)) throw BadParams("route gaussian-large-b needs b > s");
      // beta > beta_*  <=>  -beta < -beta_*.
      const double beta_star = std::sqrt(2.0 * (b - s) * std::log(double(b)) / ((b - 1.0) * (s - 1.0)));
      c.estimate.value = -beta;
      c.threshold = -beta_star;
      c.deterministic = true;
      c.z = 0.0;
      c.extras = {{"beta_threshold", beta_star}};
      decide(c);
      break;
    }
    case PolymerRoute::fractional_moment: {
      const double t = theta.value_or(0.5);
      if (n < 0) throw BadParams("n must be >= 0");
      c.inputs.insert(c.inputs.end(), {{"theta", t}, {"n", double(n)}, {"M", double(opt.budget.pool_size)},
                                       {"replicas", double(opt.budget.replicas)}, {"z", opt.z}});
      const double la = log_a_theta(law, beta, t);
      c.threshold = std::exp(-la + (t - 1.0) * L);
      c.deterministic = deterministic_pool(law, beta);
      c.estimate =
          fractional_moment_estimate(site_polymer(b, s), law, beta, 0.0, n, t, FractionalTarget::power, opt.budget);
      decide(c);
      if (c.certified())
        c.witness = std::pow(double(s), -n) / t * (la + (1.0 - t) * L + std::log(c.estimate.upper(c.z)));
      break;
    }
  }
  return c;
}

Certificate renewal_delocalization(const RenewalKernel& K, const DisorderLaw& law, double beta, double h, int k,
                                   double gamma, int environments, std::uint64_t seed, double z) {
  if (k < 2) throw BadParams("k must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) throw BadExponent("gamma must lie in (0, 1)");
  if ((1.0 + K.alpha()) * gamma <= 1.0) {
    std::ostringstream os;
    os << "(1 + alpha) gamma = " << (1.0 + K.alpha()) * gamma << " <= 1: sum of K(n)^gamma diverges";
    throw DivergentTail(os.str());
  }
  if (environments < 2) throw BadParams("need at least 2 environments");
  const double log_ez = law.log_mgf(gamma * beta) + gamma * h;
  // T_j = sum_{n >= k} K(n - j)^gamma = sum_{m > k - j - 1} K(m)^gamma.
  std::vector<double> T(k);
  for (int j = 0; j < k; ++j) T[j] = K.tail_sum(std::size_t(k - j - 1), gamma).hi;
  std::vector<double> rho(environments);
  parallel_for(std::size_t(environments), [&](std::size_t r) {
    const auto omega = renewal_environment(law, std::size_t(k - 1), seed, r);
    const auto lz = quenched_log_partition(K, omega, beta, h);
    double acc = T[0];
    for (int j = 1; j < k; ++j) acc += std::exp(gamma * lz[j]) * T[j];
    rho[r] = std::exp(log_ez) * acc;
  });
  const auto ms = mean_stderr(rho);
  Certificate c;
  c.kind = CertificateKind::renewal_deloc;
  c.inputs = {{"beta", beta}, {"h", h}, {"k", double(k)}, {"gamma", gamma}, {"environments", double(environments)},
              {"z", z}};
  c.z = z;
  c.threshold = 1.0;
  c.strict = false;
  c.deterministic = deterministic_pool(law, beta);
  c.estimate = {ms.mean, ms.stderr_, std::size_t(environments), seed, "renewal " + K.describe(), beta, h, k};
  c.extras = {{"log_E_z_gamma", log_ez}};
  decide(c);
  return c;
}

}  // namespace diamondlab
