#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/estimate.hpp"
#include "diamondlab/hier_mc.hpp"
#include "diamondlab/renewal.hpp"

namespace diamondlab {

// Finite-volume sufficient conditions, evaluated with Monte Carlo moments.
// A verdict of `certified` is a statistical certificate at confidence z, not
// a proof; a failed check is `inconclusive`, never evidence of the converse.

enum class CertificateKind { pin_bond_deloc, pin_site_deloc, polymer_strong, renewal_deloc };
enum class Verdict { certified, inconclusive };
enum class PolymerRoute { fractional_moment, closed_form, gaussian_large_b };

std::string to_string(CertificateKind k);
std::string to_string(Verdict v);
std::string to_string(PolymerRoute r);

struct Certificate {
  CertificateKind kind = CertificateKind::pin_bond_deloc;
  std::string route;
  std::vector<std::pair<std::string, double>> inputs;
  Estimate estimate;  // the tested quantity; stderr 0 when deterministic
  double z = 3.0;
  double threshold = 0.0;
  bool strict = true;  // estimate + z stderr < threshold, else <=
  bool deterministic = false;
  Verdict verdict = Verdict::inconclusive;
  /// Upper bound on the free-energy gap rate (polymer), negative on success.
  std::optional<double> witness;
  /// Pin-bond: the deterministic orbit A -> (A^2 + 2A)/B^gamma from the CI
  /// upper end.
  std::vector<double> orbit;
  bool orbit_to_zero = false;
  std::vector<std::pair<std::string, double>> extras;
  std::string label;

  bool certified() const noexcept { return verdict == Verdict::certified; }
};

struct CertifyOptions {
  McBudget budget;
  double z = 3.0;
};

/// Bond pinning with s = 2 and B branches: certifies F = 0 when
/// E[((R_{n0} - 1)^+)^gamma] + z se < B^gamma - 2. Throws BadExponent unless
/// log 2 / log B < gamma < 1.
Certificate pin_bond_delocalization(const DisorderLaw& law, double B, double beta, double h, double gamma, int n0,
                                    const CertifyOptions& opt = {});

/// Largest x with (x^s + (b-1)^theta) / b^theta <= x. Throws NoTrapPoint if
/// there is none. Also returns the smaller root as `first`.
std::pair<double, double> trap_points(int b, int s, double theta);

/// Site pinning, b < s: certifies F = 0 when E[R_n^theta] + z se < x_theta.
/// Throws SideConditionFailed unless lambda(theta beta) - theta lambda(beta)
/// + theta h <= 0.
Certificate pin_site_delocalization(const DisorderLaw& law, int b, int s, double beta, double h, double theta,
                                    int n, const CertifyOptions& opt = {});

/// Strong (and very strong) disorder for the site-disorder hierarchical
/// polymer.
///  fractional_moment: E[W_n^theta] + z se < a_theta^{-1} b^{(theta-1)/(s-1)}.
///  closed_form: a_theta < b^{(theta-1)/(s-1)}; theta is optimized when not
///    given.
///  gaussian_large_b: b > s and beta > sqrt(2 (b-s) log b / ((b-1)(s-1))).
/// theta must lie in (0, 1]; theta = 1 always leaves the closed form
/// inconclusive.
Certificate polymer_strong_disorder(const DisorderLaw& law, int b, int s, double beta, PolymerRoute route,
                                    std::optional<double> theta = std::nullopt, int n = 0,
                                    const CertifyOptions& opt = {});

/// Minimizer over theta in (0, 1) of theta^{-1} (log a_theta + (1-theta) log b/(s-1)):
/// grid with step 0.02, then golden section to 1e-4.
std::pair<double, double> optimize_theta(const DisorderLaw& law, int b, int s, double beta);

/// Renewal pinning: certifies F = 0 when
/// rho = E[z^gamma] sum_{j<k} A_j sum_{n>=k} K(n-j)^gamma, A_j = E[Z_j^gamma],
/// satisfies rho + z se <= 1. Throws DivergentTail if (1 + alpha) gamma <= 1.
Certificate renewal_delocalization(const RenewalKernel& K, const DisorderLaw& law, double beta, double h, int k,
                                   double gamma, int environments, std::uint64_t seed, double z = 3.0);

}  // namespace diamondlab
