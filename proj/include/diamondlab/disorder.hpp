#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diamondlab/rng.hpp"

namespace diamondlab {

enum class Family { gaussian, rademacher, bernoulli_pair, discrete_atoms };

std::string to_string(Family f);

struct Atom {
  double value;
  double weight;
};

/// Mean and variance of the law as handed to the constructor, before it was
/// standardized.
struct Normalization {
  double mean = 0.0;
  double variance = 1.0;
};

/// Disorder distribution omega together with its log-moment generating
/// function lambda(beta) = log E exp(beta * omega).
///
/// The named constructors return centered, unit-variance laws. A law obtained
/// from tilted() is not centered any more; it keeps the family of its base
/// (gaussian tilts to a shifted gaussian, atom laws are reweighted).
class DisorderLaw {
 public:
  static DisorderLaw gaussian();
  static DisorderLaw rademacher();
  /// Two atoms with P(upper atom) = p, placed so the law is centered with unit
  /// variance: sqrt((1-p)/p) and -sqrt(p/(1-p)).
  static DisorderLaw bernoulli_pair(double p);
  /// Arbitrary finite law; the atoms are shifted and scaled to mean 0,
  /// variance 1 and the original moments are kept in normalization().
  static DisorderLaw discrete_atoms(std::vector<Atom> atoms);

  Family family() const noexcept { return family_; }
  bool is_gaussian() const noexcept { return family_ == Family::gaussian; }
  bool is_finite() const noexcept { return !is_gaussian(); }
  /// Mean of the gaussian family (0 unless tilted).
  double gaussian_mean() const noexcept { return gaussian_mean_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const Normalization& normalization() const noexcept { return normalization_; }
  /// Law parameter p of bernoulli_pair, 0 otherwise.
  double pair_probability() const noexcept { return pair_p_; }

  double mean() const noexcept;
  double variance() const noexcept;

  /// Restricts the admissible beta range of log_mgf; infinite by default.
  DisorderLaw with_domain(double lo, double hi) const;
  double domain_lo() const noexcept { return domain_lo_; }
  double domain_hi() const noexcept { return domain_hi_; }

  /// lambda(beta); throws DomainError outside the declared domain.
  double log_mgf(double beta) const;
  /// lambda'(beta), the mean of the law tilted by exp(beta * omega).
  double log_mgf_derivative(double beta) const;

  /// Law with density proportional to exp(-delta * omega).
  DisorderLaw tilted(double delta) const;

  std::string describe() const;

 private:
  DisorderLaw() = default;
  void check_domain(double beta) const;

  Family family_ = Family::gaussian;
  double gaussian_mean_ = 0.0;
  std::vector<Atom> atoms_;
  Normalization normalization_;
  double pair_p_ = 0.0;
  double domain_lo_;
  double domain_hi_;
};

double log_mgf(const DisorderLaw& law, double beta);

/// gamma(beta) = lambda(2 beta) - 2 lambda(beta), the two-replica interaction.
double gamma_two_replica(const DisorderLaw& law, double beta);

DisorderLaw exponential_tilt(const DisorderLaw& law, double delta);

/// Stateful sampler for one law; owned by a single worker.
class DisorderSampler {
 public:
  explicit DisorderSampler(const DisorderLaw& law);

  double operator()(Philox& rng);
  void fill(Philox& rng, std::span<double> out);

 private:
  const DisorderLaw* law_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::vector<double> cumulative_;
};

/// `count` draws from the stream (seed, stream_id). Deterministic.
std::vector<double> sample_stream(const DisorderLaw& law, std::uint64_t seed,
                                  std::uint64_t stream_id, std::size_t count);

}  // namespace diamondlab
