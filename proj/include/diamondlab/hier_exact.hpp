#pragma once

#include <string>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/quadrature.hpp"

namespace diamondlab {

enum class Placement { bond, site };
enum class ModelKind { pinning, polymer };

std::string to_string(Placement p);
std::string to_string(ModelKind m);

/// Diamond lattice descriptor: every edge is replaced by b parallel branches
/// of s edges. For pinning b may be any real > 1; polymers need integer b >= 2.
struct DiamondParams {
  double b = 2.0;
  int s = 2;
  Placement placement = Placement::bond;
  ModelKind model = ModelKind::pinning;

  /// Throws BadParams if the combination is not admissible.
  void validate() const;
  std::string describe() const;
  /// Number of branches as an integer (polymers).
  int branches() const { return static_cast<int>(b); }
};

inline DiamondParams bond_pinning(double b, int s = 2) { return {b, s, Placement::bond, ModelKind::pinning}; }
inline DiamondParams site_pinning(double b, int s) { return {b, s, Placement::site, ModelKind::pinning}; }
inline DiamondParams site_polymer(int b, int s) { return {double(b), s, Placement::site, ModelKind::polymer}; }
inline DiamondParams bond_polymer(int b, int s) { return {double(b), s, Placement::bond, ModelKind::polymer}; }

struct CertifiedValue {
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;

  double width() const noexcept { return upper - lower; }
  double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

/// Annealed orbit r_0..r_n, stored as logarithms so divergent orbits stay
/// representable.
struct AnnealedOrbit {
  std::vector<double> log_r;

  double r(std::size_t k) const;
  std::size_t size() const noexcept { return log_r.size(); }
};

/// Pinning only. Bond: r_0 = e^h, r' = (r^s + b - 1)/b.
/// Site: r_0 = 1, r' = (e^{(s-1)h} r^s + b - 1)/b.
AnnealedOrbit annealed_iterate(const DiamondParams& p, double h, int n);

/// True iff the annealed orbit started at r_0 grows without bound, decided
/// from the fixed points of the map rather than by iterating.
bool annealed_diverges(const DiamondParams& p, double h);

/// Sandwich for F(0,h) = lim s^-n log r_n. Returns [0,0] when the orbit stays
/// bounded.
CertifiedValue annealed_free_energy(const DiamondParams& p, double h, double tol, int max_iter = 5000);

double annealed_critical_point(const DiamondParams& p);

/// log T'(h_c) / log s for the annealed map T; 0 when h_c is a tangency
/// (saddle-node) point.
double alpha_exponent(const DiamondParams& p);

/// phi(x) = 1 - (1 - x^s)^b.
double percolation_map(int b, int s, double x);
double percolation_map_derivative(int b, int s, double x);
double percolation_threshold(int b, int s, double tol = 1e-13);

/// Exact first and second moment sequences. Only the fields belonging to the
/// model are filled.
struct MomentSeries {
  std::vector<double> mean;   // <R_n> or E W_n
  std::vector<double> P;      // <R_n> - (B - 1), bond pinning s = 2
  std::vector<double> Delta;  // Var R_n
  std::vector<double> Q;      // Delta_n / <R_n>^2
  std::vector<double> v;      // Var W_n, polymer
};

MomentSeries moment_recursions(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n);

struct SmallNResult {
  double mean_log = 0.0;
  std::vector<double> thetas;
  std::vector<double> fractional_moments;  // E[R_n^theta] for each theta
  std::size_t support = 0;                 // atoms of the final law
};

/// Deterministic law of log R_n (or log W_n). Gaussian disorder is
/// discretized by a Gauss-Hermite rule and every intermediate law of a
/// logarithm is reduced back to `order` atoms by a Gauss rule, which keeps
/// products of independent factors moment-exact; finite-atom disorder is
/// enumerated exactly.
Rule exact_law(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n, int order);

SmallNResult exact_small_n(const DiamondParams& p, const DisorderLaw& law, double beta, double h, int n,
                           int order, const std::vector<double>& thetas = {});

/// Leaves cap of the exact oracle (s^n).
inline constexpr double kExactLeafCap = 16384.0;

}  // namespace diamondlab
