// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number; the exit status is nonzero if any selected one fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "diamondlab/certificates.hpp"
#include "diamondlab/cli/run.hpp"
#include "diamondlab/critical.hpp"
#include "diamondlab/disorder.hpp"
#include "diamondlab/hier_exact.hpp"
#include "diamondlab/hier_mc.hpp"
#include "diamondlab/renewal.hpp"
#include "diamondlab/zd_polymer.hpp"

using namespace diamondlab;

namespace {

const DisorderLaw kGauss = DisorderLaw::gaussian();

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome annealed_exactness() {
  Outcome o;
  const double a = annealed_critical_point(bond_pinning(3.0, 2));
  o.check(std::abs(a - std::log(2.0)) < 1e-10, fmt("bond B=3 s=2: h_c - log 2 = %.2e", a - std::log(2.0)));
  const double b = annealed_critical_point(bond_pinning(3.0, 3));
  o.check(std::abs(b) < 1e-10, fmt("bond b=3 s=3: h_c = %.2e", b));
  const double c = annealed_critical_point(site_pinning(2.0, 4));
  o.check(std::abs(c) < 1e-10, fmt("site b=2 s=4: h_c = %.2e", c));
  return o;
}

Outcome annealed_exponent() {
  Outcome o;
  for (const auto& p : {bond_pinning(3.0), bond_pinning(5.0), site_pinning(2.0, 4), site_pinning(2.0, 3)}) {
    const double hc = annealed_critical_point(p);
    std::vector<double> lx, ly;
    for (int i = 0; i <= 12; ++i) {
      const double dh = std::pow(10.0, -5.0 + 0.25 * i);
      const auto f = annealed_free_energy(p, hc + dh, 1e-6 * dh * dh * dh);
      lx.push_back(std::log(dh));
      ly.push_back(std::log(f.midpoint()));
    }
    const double slope = fit_slope(lx, ly);
    const double target = 1.0 / alpha_exponent(p);
    o.check(std::abs(slope / target - 1.0) < 0.05, fmt("%s slope %.4f vs %.4f", p.describe().c_str(), slope, target));
  }
  return o;
}

Outcome percolation() {
  Outcome o;
  const double pc = percolation_threshold(2, 2);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  o.check(std::abs(pc - golden) < 1e-10, fmt("p_c(2,2) - golden = %.2e", pc - golden));
  for (int b : {2, 3})
    for (int s : {2, 3}) {
      const double d = percolation_map_derivative(b, s, percolation_threshold(b, s));
      o.check(d > 1.0, fmt("phi'(p_c) at (%d,%d) = %.4f", b, s, d));
    }
  return o;
}

Outcome moment_agreement() {
  Outcome o;
  const int n_max = 8;
  const McBudget budget{100000, 32, 4};
  {
    const auto p = bond_pinning(3.0);
    const double h = std::log(2.0);
    const auto mom = moment_recursions(p, kGauss, 0.3, h, n_max);
    const auto mc = pool_moment_series(p, kGauss, 0.3, h, n_max, budget);
    double worst_mean = 0, worst_var = 0;
    for (int n = 0; n <= n_max; ++n) {
      worst_mean = std::max(worst_mean, std::abs(mc[n].mean.value - (mom.P[n] + 2.0)) / mc[n].mean.stderr_);
      worst_var = std::max(worst_var, std::abs(mc[n].variance.value - mom.Delta[n]) / mc[n].variance.stderr_);
    }
    o.check(worst_mean < 4.0, fmt("bond mean max |z| %.2f", worst_mean));
    o.check(worst_var < 4.0, fmt("bond variance max |z| %.2f", worst_var));
  }
  {
    const auto p = site_polymer(2, 2);
    const auto mom = moment_recursions(p, kGauss, 0.3, 0.0, n_max);
    const auto mc = pool_moment_series(p, kGauss, 0.3, 0.0, n_max, budget);
    double worst_mean = 0, worst_var = 0;
    for (int n = 0; n <= n_max; ++n) {
      if (mc[n].mean.stderr_ > 0) worst_mean = std::max(worst_mean, std::abs(mc[n].mean.value - 1.0) / mc[n].mean.stderr_);
      if (mc[n].variance.stderr_ > 0)
        worst_var = std::max(worst_var, std::abs(mc[n].variance.value - mom.v[n]) / mc[n].variance.stderr_);
    }
    o.check(worst_mean < 4.0, fmt("polymer mean max |z| %.2f", worst_mean));
    o.check(worst_var < 4.0, fmt("polymer variance max |z| %.2f", worst_var));
  }
  return o;
}

Outcome exact_vs_population() {
  Outcome o;
  const auto p = bond_pinning(2.0);
  const auto series = free_energy_series(p, kGauss, 0.5, 0.0, 6, {100000, 32, 5});
  double worst = 0;
  for (int n = 0; n <= 6; ++n) {
    const double exact = exact_small_n(p, kGauss, 0.5, 0.0, n, 32).mean_log;
    const double se = series[n].estimate.stderr_ * std::pow(2.0, n);
    worst = std::max(worst, std::abs(series[n].mean_log - exact) / se);
  }
  o.check(worst < 4.0, fmt("max |z| over n <= 6: %.2f", worst));
  return o;
}

Outcome renewal_closed_form() {
  Outcome o;
  const auto K = geometric_kernel(0.5);
  double worst = 0;
  for (int i = 1; i <= 20; ++i) {
    const double h = 0.1 * i;
    const auto f = homogeneous_free_energy(K, h, 1e-12);
    worst = std::max(worst, std::abs(f.midpoint() - std::log((std::exp(h) + 1.0) / 2.0)));
  }
  o.check(worst < 1e-9, fmt("geometric max error %.2e", worst));
  const double hc = renewal_critical_point(geometric_kernel(0.5, 0.5));
  o.check(std::abs(hc - std::log(2.0)) < 1e-12, fmt("h_c - log 2 = %.2e", hc - std::log(2.0)));
  const auto a = critical_asymptotics_check(power_law_kernel(0.5), geometric_grid(1e-3, 0.1, 10));
  o.check(std::abs(a.slope - 2.0) < 0.1, fmt("power-law slope %.4f", a.slope));
  return o;
}

Outcome annealing_identities() {
  Outcome o;
  const auto q = quenched_summary(srw_kernel(), kGauss, 0.5, -0.2, 64, 10000, 7);
  const double annealed = std::exp(q.annealed_log_partition);
  const double z = (q.mean_partition.value - annealed) / q.mean_partition.stderr_;
  o.check(std::abs(z) < 4.0, fmt("renewal E Z_N vs annealed: z = %.2f", z));

  const int replicas = 10000;
  std::vector<double> w(replicas);
  for (int r = 0; r < replicas; ++r) w[r] = std::exp(transfer_partition(1, kGauss, 0.5, 64, 7, r).log_W);
  const auto m = mean_stderr(w);
  const double zw = (m.mean - 1.0) / m.stderr_;
  o.check(std::abs(zw) < 4.0, fmt("lattice E W_N = %.5f (se %.1e), z = %.2f", m.mean, m.stderr_, zw));
  return o;
}

Outcome second_moment_bridge() {
  Outcome o;
  const auto c = second_moment_crosscheck(1, kGauss, 0.5, 32, 10000, 8);
  o.check(std::abs(c.mc.value - c.exact) < 4.0 * c.mc.stderr_,
          fmt("replica %.5f vs exact %.5f (se %.1e)", c.mc.value, c.exact, c.mc.stderr_));
  const double g = gamma_two_replica(kGauss, 0.5);
  const double renewal = std::exp(homogeneous_log_partition(srw_kernel(), g, 32, true)[32]);
  const double rel = std::abs(c.exact / renewal - 1.0);
  o.check(rel < 1e-10, fmt("transfer vs intersection renewal rel %.1e", rel));
  return o;
}

Outcome very_strong_disorder() {
  Outcome o;
  const auto d1 = quenched_free_energy_zd(1, kGauss, 1.0, 512, 256, 9).estimate;
  o.check(d1.value + 3 * d1.stderr_ < 0, fmt("d=1: %.5f + 3 * %.1e", d1.value, d1.stderr_));
  const auto d2 = quenched_free_energy_zd(2, kGauss, 1.5, 128, 256, 9).estimate;
  o.check(d2.value + 3 * d2.stderr_ < 0, fmt("d=2: %.5f + 3 * %.1e", d2.value, d2.stderr_));
  const auto h = free_energy_estimate(site_polymer(2, 2), kGauss, 1.0, 0.0, 14, {100000, 32, 9}).estimate;
  o.check(h.value + 3 * h.stderr_ < 0, fmt("hierarchical: %.5f + 3 * %.1e", h.value, h.stderr_));
  return o;
}

Outcome certificates() {
  Outcome o;
  const CertifyOptions opt{{100000, 32, 10}, 3.0};
  for (int n0 : {0, 1}) {
    const auto c = pin_bond_delocalization(kGauss, 10.0, 3.0, std::log(9.0), 0.8, n0, opt);
    o.check(c.certified(), fmt("pin-bond n0=%d: %.4f + 3 * %.1e < %.4f", n0, c.estimate.value, c.estimate.stderr_,
                               c.threshold));
  }
  const int n = 14;
  const auto fe = free_energy_estimate(bond_pinning(10.0), kGauss, 3.0, std::log(9.0), n, {100000, 32, 10});
  const double reference = std::pow(2.0, -n) * std::log(9.0);
  o.check(fe.estimate.value - 3 * fe.estimate.stderr_ <= reference,
          fmt("F_14 = %.3e, 0-compatible against %.3e", fe.estimate.value, reference));

  const auto iv = polymer_strong_disorder(kGauss, 4, 2, 1.4, PolymerRoute::gaussian_large_b);
  o.check(iv.certified(), fmt("route iv: beta 1.4 above plug-in %.4f", -iv.threshold));
  const auto ii = polymer_strong_disorder(kGauss, 4, 2, 1.4, PolymerRoute::closed_form);
  o.check(!ii.certified(), fmt("route ii inconclusive at 1.4: %.4f vs %.4f", ii.estimate.value, ii.threshold));

  const double h = -kGauss.log_mgf(1.0) - 0.5;
  const auto r = renewal_delocalization(srw_kernel(), kGauss, 1.0, h, 16, 0.8, 10000, 10);
  o.check(r.certified(), fmt("renewal rho %.4f + 3 * %.1e <= 1", r.estimate.value, r.estimate.stderr_));
  return o;
}

Outcome critical_direction() {
  Outcome o;
  CriticalSearchOptions opt;
  opt.budget = {100000, 32, 11};
  opt.level = 14;
  const auto hi = critical_point_search(bond_pinning(5.0), kGauss, 0.6, std::log(4.0), std::log(4.0) + 0.3, opt);
  const double gap = hi.h_lo - std::log(4.0);
  o.check(gap > 3 * hi.stderr_,
          fmt("B=5: [%.6f, %.6f], h_lo - log 4 = %.4f, stderr %.1e", hi.h_lo, hi.h_hi, gap, hi.stderr_));
  const auto lo = critical_point_search(bond_pinning(3.0), kGauss, 0.2, std::log(2.0) - 0.1, std::log(2.0) + 0.3, opt);
  o.check(lo.h_lo <= std::log(2.0) && std::log(2.0) <= lo.h_hi, fmt("B=3: [%.7f, %.7f]", lo.h_lo, lo.h_hi));
  return o;
}

Outcome fluctuations() {
  Outcome o;
  const auto rows = variance_log_partition(site_polymer(2, 3), kGauss, 1.0, 0.0, 13, {100000, 32, 12}, 1000);
  double sum = 0;
  int count = 0;
  for (const auto& r : rows)
    if (r.level >= 8 && r.level <= 13) {
      sum += r.ratio;
      ++count;
    }
  const double mean_ratio = sum / count;
  o.check(std::abs(mean_ratio / 1.5 - 1.0) < 0.2, fmt("mean ratio over 8..13: %.4f", mean_ratio));

  std::vector<Estimate> c;
  for (int m : {4, 8, 12}) c.push_back(branch_concentration(site_polymer(2, 2), kGauss, 1.0, m, {20000, 16, 12}));
  o.check(c[0].value < c[1].value && c[1].value < c[2].value,
          fmt("branch concentration %.4f < %.4f < %.4f", c[0].value, c[1].value, c[2].value));
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "diamondlab_acceptance_rerun";
  fs::remove_all(root);
  std::string first;
  for (const char* sub : {"a", "b"}) {
    const std::string dir = (root / sub).string();
    const std::vector<const char*> argv{"diamondlab", "pool", "run", "--b", "3", "--beta", "0.3", "--h", "0.69",
                                        "--n", "6", "--pool-size", "5000", "--replicas", "4", "--seed", "13",
                                        "--threads", "1", "--out", dir.c_str()};
    std::ostringstream out, err;
    const int rc = cli::main_entry(int(argv.size()), argv.data(), out, err);
    o.check(rc == 0, fmt("run %s exit %d", sub, rc));
    const auto csv = slurp(root / sub / "result.csv");
    if (first.empty()) first = csv;
    else o.check(!csv.empty() && csv == first, "pool run CSV byte-identical across reruns");
  }
  fs::remove_all(root);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "annealed exactness", annealed_exactness},
      {2, "annealed exponent", annealed_exponent},
      {3, "percolation", percolation},
      {4, "moment recursions vs pool", moment_agreement},
      {5, "exact tree vs population", exact_vs_population},
      {6, "renewal closed form", renewal_closed_form},
      {7, "annealing identities", annealing_identities},
      {8, "second-moment bridge", second_moment_bridge},
      {9, "very strong disorder sign", very_strong_disorder},
      {10, "certificates", certificates},
      {11, "critical-point direction", critical_direction},
      {12, "fluctuation diagnostic", fluctuations},
      {13, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %-28s %8.1fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
