#include "diamondlab/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "diamondlab/errors.hpp"

namespace diamondlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log sum_i w_i exp(t * v_i), shifted by the largest exponent.
double log_weighted_exp_sum(const std::vector<Atom>& atoms, double t) {
  double top = -kInf;
  for (const auto& a : atoms)
    if (a.weight > 0) top = std::max(top, t * a.value);
  double acc = 0.0;
  for (const auto& a : atoms)
    if (a.weight > 0) acc += a.weight * std::exp(t * a.value - top);
  return top + std::log(acc);
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian:
      return "gaussian";
    case Family::rademacher:
      return "rademacher";
    case Family::bernoulli_pair:
      return "bernoulli-pair";
    case Family::discrete_atoms:
      return "discrete-atoms";
  }
  return "unknown";
}

DisorderLaw DisorderLaw::gaussian() {
  DisorderLaw law;
  law.family_ = Family::gaussian;
  law.domain_lo_ = -kInf;
  law.domain_hi_ = kInf;
  return law;
}

DisorderLaw DisorderLaw::rademacher() {
  DisorderLaw law;
  law.family_ = Family::rademacher;
  law.atoms_ = {{-1.0, 0.5}, {1.0, 0.5}};
  law.domain_lo_ = -kInf;
  law.domain_hi_ = kInf;
  return law;
}

DisorderLaw DisorderLaw::bernoulli_pair(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("bernoulli-pair requires p in (0, 1)");
  DisorderLaw law;
  law.family_ = Family::bernoulli_pair;
  law.pair_p_ = p;
  law.atoms_ = {{-std::sqrt(p / (1.0 - p)), 1.0 - p}, {std::sqrt((1.0 - p) / p), p}};
  law.domain_lo_ = -kInf;
  law.domain_hi_ = kInf;
  return law;
}

DisorderLaw DisorderLaw::discrete_atoms(std::vector<Atom> atoms) {
  if (atoms.size() < 2) throw DomainError("discrete-atoms needs at least two atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0) || !std::isfinite(a.value))
      throw DomainError("discrete-atoms: weights must be non-negative and values finite");
    total += a.weight;
  }
  if (!(total > 0.0)) throw DomainError("discrete-atoms: total weight must be positive");
  double mean = 0.0;
  for (auto& a : atoms) {
    a.weight /= total;
    mean += a.weight * a.value;
  }
  double var = 0.0;
  for (const auto& a : atoms) var += a.weight * (a.value - mean) * (a.value - mean);
  if (!(var > 0.0)) throw DomainError("discrete-atoms: law is degenerate");
  const double sd = std::sqrt(var);
  for (auto& a : atoms) a.value = (a.value - mean) / sd;

  DisorderLaw law;
  law.family_ = Family::discrete_atoms;
  law.atoms_ = std::move(atoms);
  law.normalization_ = {mean, var};
  law.domain_lo_ = -kInf;
  law.domain_hi_ = kInf;
  return law;
}

double DisorderLaw::mean() const noexcept {
  if (is_gaussian()) return gaussian_mean_;
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight * a.value;
  return m;
}

double DisorderLaw::variance() const noexcept {
  if (is_gaussian()) return 1.0;
  const double m = mean();
  double v = 0.0;
  for (const auto& a : atoms_) v += a.weight * (a.value - m) * (a.value - m);
  return v;
}

DisorderLaw DisorderLaw::with_domain(double lo, double hi) const {
  if (!(lo < hi) || lo > 0.0 || hi < 0.0) throw DomainError("MGF domain must contain 0");
  DisorderLaw law = *this;
  law.domain_lo_ = lo;
  law.domain_hi_ = hi;
  return law;
}

void DisorderLaw::check_domain(double beta) const {
  if (!std::isfinite(beta) || beta < domain_lo_ || beta > domain_hi_) {
    std::ostringstream os;
    os << "beta = " << beta << " outside the MGF domain [" << domain_lo_ << ", " << domain_hi_ << "]";
    throw DomainError(os.str());
  }
}

double DisorderLaw::log_mgf(double beta) const {
  check_domain(beta);
  if (beta == 0.0) return 0.0;
  if (is_gaussian()) return gaussian_mean_ * beta + 0.5 * beta * beta;
  return log_weighted_exp_sum(atoms_, beta);
}

double DisorderLaw::log_mgf_derivative(double beta) const {
  check_domain(beta);
  if (is_gaussian()) return gaussian_mean_ + beta;
  const double l = log_weighted_exp_sum(atoms_, beta);
  double d = 0.0;
  for (const auto& a : atoms_)
    if (a.weight > 0) d += a.value * a.weight * std::exp(beta * a.value - l);
  return d;
}

DisorderLaw DisorderLaw::tilted(double delta) const {
  check_domain(-delta);
  DisorderLaw law = *this;
  if (delta == 0.0) return law;
  if (is_gaussian()) {
    law.gaussian_mean_ = gaussian_mean_ - delta;
  } else {
    const double l = log_weighted_exp_sum(atoms_, -delta);
    for (auto& a : law.atoms_) a.weight = a.weight * std::exp(-delta * a.value - l);
  }
  // The tilted MGF domain is the base domain shifted by delta.
  law.domain_lo_ = domain_lo_ + delta;
  law.domain_hi_ = domain_hi_ + delta;
  return law;
}

std::string DisorderLaw::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  if (is_gaussian() && gaussian_mean_ != 0.0) os << "(mean=" << gaussian_mean_ << ")";
  if (family_ == Family::bernoulli_pair) os << "(p=" << pair_p_ << ")";
  return os.str();
}

double log_mgf(const DisorderLaw& law, double beta) { return law.log_mgf(beta); }

double gamma_two_replica(const DisorderLaw& law, double beta) {
  return law.log_mgf(2.0 * beta) - 2.0 * law.log_mgf(beta);
}

DisorderLaw exponential_tilt(const DisorderLaw& law, double delta) { return law.tilted(delta); }

DisorderSampler::DisorderSampler(const DisorderLaw& law)
    : law_(&law), normal_(law.gaussian_mean(), 1.0) {
  if (!law.is_gaussian()) {
    cumulative_.reserve(law.atoms().size());
    double acc = 0.0;
    for (const auto& a : law.atoms()) cumulative_.push_back(acc += a.weight);
    cumulative_.back() = 1.0;
  }
}

double DisorderSampler::operator()(Philox& rng) {
  if (law_->is_gaussian()) return normal_(rng);
  const double u = uniform_(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                         cumulative_.size() - 1);
  return law_->atoms()[idx].value;
}

void DisorderSampler::fill(Philox& rng, std::span<double> out) {
  for (auto& x : out) x = (*this)(rng);
}

std::vector<double> sample_stream(const DisorderLaw& law, std::uint64_t seed, std::uint64_t stream_id,
                                  std::size_t count) {
  std::vector<double> out(count);
  Philox rng(seed, stream_id);
  DisorderSampler sampler(law);
  sampler.fill(rng, out);
  return out;
}

}  // namespace diamondlab
