#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "diamondlab/errors.hpp"
#include "diamondlab/renewal.hpp"

using namespace diamondlab;

namespace {

// Direct linear-domain convolution Z_n = e^h sum_{m<n} Z_m K(n-m).
std::vector<double> linear_partition(const RenewalKernel& K, double h, std::size_t N) {
  std::vector<double> z(N + 1, 0.0);
  z[0] = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) acc += z[m] * K(n - m);
    z[n] = std::exp(h) * acc;
  }
  return z;
}

}  // namespace

TEST_CASE("kernel constructors") {
  const auto g = geometric_kernel(0.5);
  CHECK(g(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g(5) == doctest::Approx(1.0 / 32).epsilon(1e-15));
  CHECK(g.total_mass() == 1.0);

  const auto s = srw_kernel();
  CHECK(s(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s(2) == doctest::Approx(6.0 / 48.0).epsilon(1e-15));
  CHECK(s(3) == doctest::Approx(20.0 / (5.0 * 64.0)).epsilon(1e-15));
  CHECK(s.alpha() == 0.5);

  CHECK_THROWS_AS(power_law_kernel(0.0), BadParams);
  CHECK_THROWS_AS(power_law_kernel(0.5, 5.0), BadParams);
  CHECK_THROWS_AS(geometric_kernel(1.0), BadParams);
  CHECK_THROWS_AS(geometric_kernel(0.5, 1.5), BadParams);
  KernelSpec bad;
  bad.kind = KernelKind::custom;
  bad.table = {0.7, 0.6};
  CHECK_THROWS_AS(make_kernel(bad), BadParams);
}

TEST_CASE("total mass from stored values and certified tail") {
  for (const auto& K : {srw_kernel(), power_law_kernel(0.5), power_law_kernel(2.0), power_law_kernel(0.7, 1.5),
                        power_law_kernel(1.2, -2.0)}) {
    CAPTURE(K.describe());
    const Interval t = K.tail_sum(0);
    CHECK(t.lo <= t.hi);
    CHECK(t.lo > 1.0 - 1e-12);
    CHECK(t.hi < 1.0 + 1e-12);
  }
}

TEST_CASE("srw tail sum brackets the exact survival beyond the stored range") {
  const auto s = srw_kernel();
  for (std::size_t N : {std::size_t(10), RenewalKernel::kStored, RenewalKernel::kStored + 1000}) {
    // sum_{n > N} K(n) = C(2N, N) / 4^N, by the product recurrence.
    long double u = 1.0L;
    for (std::size_t n = 1; n <= N; ++n) u *= (2.0L * n - 1.0L) / (2.0L * n);
    const double exact = double(u);
    const Interval t = s.tail_sum(N);
    CAPTURE(N);
    CHECK(t.lo <= exact * (1 + 1e-12));
    CHECK(t.hi >= exact * (1 - 1e-12));
    CHECK(t.hi - t.lo < 1e-10 * exact);
    CHECK(s.survival(N) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("envelope holds on the stored range") {
  for (const auto& K : {srw_kernel(), power_law_kernel(0.5), power_law_kernel(0.8, 2.0)}) {
    const double C = K.envelope_constant();
    for (std::size_t n = 1; n <= RenewalKernel::kStored; n += 7) {
      const double env = C * std::pow(double(n), -(1 + K.alpha())) * std::pow(std::log1p(double(n)), K.log_power());
      REQUIRE(K(n) <= env * (1 + 1e-14));
    }
  }
}

TEST_CASE("geometric free energy closed form") {
  const auto g = geometric_kernel(0.5);
  for (double h = 0.1; h <= 2.0 + 1e-9; h += 0.1) {
    const auto F = homogeneous_free_energy(g, h, 1e-11);
    const double exact = std::log((std::exp(h) + 1.0) / 2.0);
    CAPTURE(h);
    CHECK(F.lower <= exact + 1e-12);
    CHECK(F.upper >= exact - 1e-12);
    CHECK(std::abs(F.midpoint() - exact) < 1e-9);
  }
  CHECK(homogeneous_free_energy(g, 1.0, 1e-11).midpoint() == doctest::Approx(0.6201145069582775).epsilon(1e-10));
}

TEST_CASE("critical point of a terminating kernel") {
  const auto g = geometric_kernel(0.5, 0.5);
  CHECK(renewal_critical_point(g) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  for (double h : {-1.0, 0.0, 0.5, std::numbers::ln2}) {
    const auto F = homogeneous_free_energy(g, h, 1e-10);
    CHECK(F.lower == 0.0);
    CHECK(F.upper == 0.0);
  }
  CHECK(homogeneous_free_energy(g, std::numbers::ln2 + 0.1, 1e-10).lower > 0.0);
  const auto s = srw_kernel();
  CHECK(homogeneous_free_energy(s, 0.0, 1e-10).upper == 0.0);
  CHECK(homogeneous_free_energy(s, -0.3, 1e-10).upper == 0.0);
}

TEST_CASE("solved root satisfies the defining equation") {
  for (const auto& K : {srw_kernel(), power_law_kernel(0.5), geometric_kernel(0.3)}) {
    for (double h : {0.01, 0.1, 0.7}) {
      const auto F = homogeneous_free_energy(K, h, 1e-10);
      CAPTURE(K.describe());
      CAPTURE(h);
      // Root bracketing: G(lower) >= e^{-h} >= G(upper).
      const auto lo = K.series(1.0, F.lower, RenewalKernel::kStored);
      const auto hi = K.series(1.0, F.upper, RenewalKernel::kStored);
      CHECK(lo.hi >= std::exp(-h));
      CHECK(hi.lo <= std::exp(-h));
      CHECK(F.width() <= 1e-10);
    }
  }
}

TEST_CASE("free energy is non-decreasing and convex") {
  const auto K = power_law_kernel(0.5);
  std::vector<double> F;
  const double dh = 0.02;
  for (int i = 0; i <= 20; ++i) F.push_back(homogeneous_free_energy(K, -0.1 + i * dh, 1e-12).midpoint());
  for (std::size_t i = 1; i < F.size(); ++i) CHECK(F[i] >= F[i - 1] - 1e-12);
  for (std::size_t i = 1; i + 1 < F.size(); ++i) CHECK(F[i + 1] - 2 * F[i] + F[i - 1] >= -1e-10);
}

TEST_CASE("critical asymptotics") {
  const auto grid = geometric_grid(1e-3, 0.1, 10);
  {
    const auto c = critical_asymptotics_check(power_law_kernel(0.5), grid);
    CHECK(c.reference == 2.0);
    CHECK(std::abs(c.slope - 2.0) < 0.1);
    CHECK(c.ci_lo <= c.slope);
    CHECK(c.ci_hi >= c.slope);
  }
  {
    const auto c = critical_asymptotics_check(power_law_kernel(2.0), grid);
    CHECK(c.reference == 1.0);
    CHECK(std::abs(c.slope - 1.0) < 0.05);
  }
  {
    const auto c = critical_asymptotics_check(geometric_kernel(0.5), grid);
    CHECK(std::abs(c.slope - 1.0) < 0.02);
  }
  CHECK_THROWS_AS(critical_asymptotics_check(srw_kernel(), geometric_grid(1e-3, 0.1, 5)), BadParams);
}

TEST_CASE("quenched DP") {
  const auto K = srw_kernel();
  const std::vector<double> w1{0.7};
  CHECK(quenched_log_partition(K, w1, 0.5, 0.2)[1] == doctest::Approx(std::log(0.5) + 0.35 + 0.2).epsilon(1e-15));

  // beta = 0 reduces to the homogeneous convolution.
  const std::size_t N = 256;
  const std::vector<double> zeros(N, 1.3);
  for (double h : {-0.5, 0.0, 0.3}) {
    const auto lz = quenched_log_partition(K, zeros, 0.0, h);
    const auto direct = linear_partition(K, h, N);
    const auto hom = homogeneous_log_partition(K, h, N);
    for (std::size_t n = 0; n <= N; ++n) {
      REQUIRE(std::abs(std::exp(lz[n]) / direct[n] - 1.0) < 1e-12);
      REQUIRE(lz[n] == doctest::Approx(hom[n]).epsilon(1e-14));
    }
  }
}

TEST_CASE("free endpoint partition") {
  const auto K = srw_kernel();
  // h = 0 with a recurrent kernel: free partition is the total probability.
  const auto lf = homogeneous_log_partition(K, 0.0, 100, true);
  for (double v : lf) CHECK(std::abs(v) < 1e-13);
  // N = 1: P(tau > 1) + K(1) e^h.
  const auto l1 = homogeneous_log_partition(K, 0.4, 1, true);
  CHECK(std::exp(l1[1]) == doctest::Approx(0.5 + 0.5 * std::exp(0.4)).epsilon(1e-15));
}

TEST_CASE("quenched mean matches the annealed partition") {
  const auto K = srw_kernel();
  const auto law = DisorderLaw::gaussian();
  const auto q = quenched_summary(K, law, 0.5, -0.2, 64, 4000, 11);
  const double annealed = std::exp(q.annealed_log_partition);
  CHECK(annealed == doctest::Approx(std::exp(homogeneous_log_partition(K, -0.2 + 0.125, 64)[64])).epsilon(1e-13));
  CHECK(std::abs(q.mean_partition.value - annealed) < 4 * q.mean_partition.stderr_);
  // Jensen.
  CHECK(q.log_partition.value * 64 < q.annealed_log_partition);
}

TEST_CASE("quenched concentration improves with N") {
  const auto K = srw_kernel();
  const auto law = DisorderLaw::gaussian();
  double prev = INFINITY;
  for (std::size_t N : {32, 64, 128}) {
    const auto q = quenched_summary(K, law, 0.8, 0.1, N, 400, 5);
    std::vector<double> v;
    for (double l : q.log_samples) v.push_back(l / double(N));
    const double var = mean_stderr(v).variance;
    CHECK(var < prev);
    prev = var;
  }
}

TEST_CASE("tilted annealed value") {
  const auto K = srw_kernel();
  const auto law = DisorderLaw::gaussian();
  const double beta = 0.7, h = -0.2;
  const auto t0 = tilted_annealed(K, law, beta, h, 0.0, 50);
  CHECK(t0.h_eff == doctest::Approx(h + beta * beta / 2).epsilon(1e-15));
  CHECK(t0.log_partition == doctest::Approx(homogeneous_log_partition(K, h + log_mgf(law, beta), 50)[50]));
  for (double tilt : {0.2, -0.4, beta}) {
    const auto t = tilted_annealed(K, law, beta, h, tilt, 50);
    CHECK(t.h_eff == doctest::Approx(h + beta * beta / 2 - beta * tilt).epsilon(1e-14));
  }
  CHECK(tilted_annealed(K, law, beta, h, beta, 50).h_eff == doctest::Approx(h - beta * beta / 2));
  const auto bounded = DisorderLaw::gaussian().with_domain(-1.0, 1.0);
  CHECK_THROWS_AS(tilted_annealed(K, bounded, 0.5, 0.0, -0.8, 10), DomainError);
}
