#include <cmath>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/estimate.hpp"
#include "doctest.h"

using namespace diamondlab;

namespace {

std::vector<DisorderLaw> builtin_laws() {
  return {DisorderLaw::gaussian(), DisorderLaw::rademacher(), DisorderLaw::bernoulli_pair(0.3),
          DisorderLaw::discrete_atoms({{0.0, 1.0}, {1.0, 2.0}, {5.0, 0.5}})};
}

}  // namespace

TEST_CASE("log_mgf examples") {
  CHECK(log_mgf(DisorderLaw::gaussian(), 0.7) == doctest::Approx(0.245).epsilon(1e-15));
  CHECK(log_mgf(DisorderLaw::rademacher(), 1.0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-15));
  CHECK(log_mgf(DisorderLaw::rademacher(), 1.0) == doctest::Approx(0.4337808).epsilon(1e-7));
  for (const auto& law : builtin_laws()) CHECK(log_mgf(law, 0.0) == 0.0);
}

TEST_CASE("gamma_two_replica examples") {
  CHECK(gamma_two_replica(DisorderLaw::gaussian(), 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  const double oracle = std::log(std::cosh(2.0)) - 2.0 * std::log(std::cosh(1.0));
  CHECK(gamma_two_replica(DisorderLaw::rademacher(), 1.0) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(0.4574411).epsilon(1e-7));
  CHECK(gamma_two_replica(DisorderLaw::gaussian(), 0.0) == 0.0);
}

TEST_CASE("built-in laws are centered with unit variance") {
  for (const auto& law : builtin_laws()) {
    CAPTURE(law.describe());
    CHECK(std::abs(law.mean()) < 1e-12);
    CHECK(std::abs(law.variance() - 1.0) < 1e-12);
    const double step = 1e-4;
    const double second = (law.log_mgf(step) - 2.0 * law.log_mgf(0.0) + law.log_mgf(-step)) / (step * step);
    CHECK(std::abs(second - 1.0) < 1e-6);
  }
}

TEST_CASE("discrete atoms keep the original normalization") {
  auto law = DisorderLaw::discrete_atoms({{1.0, 1.0}, {3.0, 1.0}});
  CHECK(law.normalization().mean == doctest::Approx(2.0));
  CHECK(law.normalization().variance == doctest::Approx(1.0));
  CHECK(law.atoms()[0].value == doctest::Approx(-1.0));
  auto pair = DisorderLaw::bernoulli_pair(0.2);
  CHECK(pair.atoms()[1].value == doctest::Approx(2.0));
  CHECK(pair.atoms()[0].value == doctest::Approx(-0.5));
}

TEST_CASE("log_mgf is convex on a grid") {
  for (const auto& law : builtin_laws()) {
    for (double b1 = -3.0; b1 <= 3.0; b1 += 0.5)
      for (double b3 = b1 + 0.5; b3 <= 3.5; b3 += 0.5) {
        const double b2 = 0.3 * b1 + 0.7 * b3;
        CHECK(law.log_mgf(b2) <= 0.3 * law.log_mgf(b1) + 0.7 * law.log_mgf(b3) + 1e-12);
      }
  }
}

TEST_CASE("gamma identity holds on the beta grid") {
  for (const auto& law : builtin_laws())
    for (int k = 1; k <= 20; ++k) {
      const double beta = 0.1 * k;
      CHECK(gamma_two_replica(law, beta) == law.log_mgf(2.0 * beta) - 2.0 * law.log_mgf(beta));
      CHECK(gamma_two_replica(law, beta) >= 0.0);
    }
}

TEST_CASE("domain errors") {
  const auto g = DisorderLaw::gaussian();
  CHECK_THROWS_AS(g.log_mgf(std::nan("")), DomainError);
  CHECK_THROWS_AS(g.log_mgf(INFINITY), DomainError);
  const auto bounded = DisorderLaw::rademacher().with_domain(-1.0, 1.0);
  CHECK_NOTHROW(bounded.log_mgf(1.0));
  CHECK_THROWS_AS(bounded.log_mgf(1.5), DomainError);
  CHECK_THROWS_AS(gamma_two_replica(bounded, 0.75), DomainError);
  CHECK_THROWS_AS(DisorderLaw::bernoulli_pair(1.0), DomainError);
  CHECK_THROWS_AS(DisorderLaw::discrete_atoms({{1.0, 1.0}, {1.0, 2.0}}), DomainError);
}

TEST_CASE("exponential tilt examples") {
  const auto g = exponential_tilt(DisorderLaw::gaussian(), 0.3);
  CHECK(g.is_gaussian());
  CHECK(g.mean() == doctest::Approx(-0.3));
  CHECK(g.variance() == 1.0);
  CHECK(g.log_mgf(1.0) == doctest::Approx(-0.3 + 0.5));

  const auto id = exponential_tilt(DisorderLaw::rademacher(), 0.0);
  CHECK(id.atoms()[0].weight == 0.5);
  CHECK(id.atoms()[1].weight == 0.5);

  const auto r = exponential_tilt(DisorderLaw::rademacher(), 1.0);
  CHECK(r.mean() == doctest::Approx(-std::tanh(1.0)).epsilon(1e-14));
  CHECK(r.mean() == doctest::Approx(-0.7615942).epsilon(1e-7));
}

TEST_CASE("tilted mean equals -lambda'(-delta)") {
  for (const auto& law : builtin_laws())
    for (double delta : {-0.8, 0.4, 1.2}) {
      const double step = 1e-5;
      const double fd = (law.log_mgf(-delta + step) - law.log_mgf(-delta - step)) / (2 * step);
      CHECK(law.tilted(delta).mean() == doctest::Approx(fd).epsilon(1e-8));
      CHECK(law.log_mgf_derivative(-delta) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("sample_stream determinism and moments") {
  const auto g = DisorderLaw::gaussian();
  CHECK(sample_stream(g, 1, 2, 0).empty());
  CHECK(sample_stream(g, 5, 9, 1000) == sample_stream(g, 5, 9, 1000));
  CHECK(sample_stream(g, 5, 9, 1000) != sample_stream(g, 5, 10, 1000));

  const auto big = sample_stream(g, 2024, 1, 1000000);
  const MeanStderr ms = mean_stderr(big);
  CHECK(std::abs(ms.mean) < 0.004);
  CHECK(std::abs(ms.variance - 1.0) < 0.005);

  for (const auto& law : builtin_laws()) {
    const std::size_t n = 40000;
    const auto x = sample_stream(law, 3, 4, n);
    const MeanStderr m = mean_stderr(x);
    CHECK(std::abs(m.mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(m.variance - 1.0) < 5.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("tilted sampler hits the tilted mean") {
  for (const auto& law : builtin_laws()) {
    const double delta = 0.6;
    const auto t = exponential_tilt(law, delta);
    const auto x = sample_stream(t, 11, 12, 100000);
    const MeanStderr m = mean_stderr(x);
    const double step = 1e-5;
    const double target = (law.log_mgf(-delta + step) - law.log_mgf(-delta - step)) / (2 * step);
    CHECK(std::abs(m.mean - target) < 4.0 * m.stderr_);
  }
}

TEST_CASE("normalized weight has mean one") {
  for (const auto& law : builtin_laws()) {
    const double beta = 0.8;
    auto x = sample_stream(law, 21, 22, 100000);
    const double lam = law.log_mgf(beta);
    for (auto& v : x) v = std::exp(beta * v - lam);
    const MeanStderr m = mean_stderr(x);
    CHECK(std::abs(m.mean - 1.0) < 4.0 * m.stderr_);
  }
}
