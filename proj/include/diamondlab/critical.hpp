#pragma once

#include <cstdint>
#include <span>
#include <optional>
#include <vector>

#include "diamondlab/disorder.hpp"
#include "diamondlab/hier_mc.hpp"

namespace diamondlab {

/// Least-squares line through (log x, log y).
struct ScalingFit {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;  // bootstrap percentile interval of the slope
  double ci_hi = 0.0;
  double residual = 0.0;  // RMS residual in log y
};

/// Throws BadInput for fewer than 4 points, mismatched sizes or non-positive
/// values.
ScalingFit exponent_fit(std::span<const double> x, std::span<const double> y, int bootstrap_rounds = 1000,
                        std::uint64_t seed = 1, double confidence = 0.95);

struct CriticalSearchOptions {
  McBudget budget;
  int level = 14;
  double tol = 1e-3;
  /// Localization threshold for the right end of the bracket; defaults to
  /// max(5 stderr, 2 sandwich width), or 2 * reference without a sandwich.
  std::optional<double> threshold;
  double z = 3.0;
};

struct CriticalInterval {
  double h_lo = 0.0;
  double h_hi = 0.0;
  /// Linearized stderr of the crossing point: F stderr over the secant slope.
  double stderr_ = 0.0;
  /// s^-n log r_n of the annealed orbit started at the annealed critical point.
  double reference = 0.0;
  double threshold = 0.0;
  FreeEnergyEstimate at_lo;
  FreeEnergyEstimate at_hi;
  int evaluations = 0;

  double midpoint() const noexcept { return 0.5 * (h_lo + h_hi); }
  double width() const noexcept { return h_hi - h_lo; }
};

/// Bisection in h on the level-n population estimate. A point is
/// 0-compatible when F - z se <= reference (no faster growth than the
/// annealed orbit at its critical point); anything else moves the upper end.
/// Throws BracketInvalid unless the left end is 0-compatible and the right end
/// exceeds threshold + z se.
CriticalInterval critical_point_search(const DiamondParams& p, const DisorderLaw& law, double beta, double h_left,
                                       double h_right, const CriticalSearchOptions& opt = {});

/// 2 alpha / (2 alpha - 1), the predicted shift exponent. Throws DomainError
/// for alpha <= 1/2.
double shift_reference_exponent(double alpha);

struct MarginalFit {
  // Least squares of log y against 1 / beta and 1 / beta^2.
  double slope_inv_beta = 0.0;
  double residual_inv_beta = 0.0;
  double slope_inv_beta2 = 0.0;
  double residual_inv_beta2 = 0.0;
  /// Tightest constants with exp(-c1 / beta^2) <= y <= exp(-c2 / beta) on the grid.
  double c1 = 0.0;
  double c2 = 0.0;
  bool bracketed = false;
};

struct ShiftScaling {
  std::vector<double> beta;
  std::vector<CriticalInterval> points;
  double h_c0 = 0.0;
  double alpha = 0.0;
  bool marginal = false;
  std::optional<ScalingFit> fit;  // h_c(beta) - h_c(0) against beta
  double reference_exponent = 0.0;
  std::optional<MarginalFit> marginal_fit;
};

/// Runs critical_point_search at each beta (bracket grown from the annealed
/// critical point) and fits the shift. The model is marginal when
/// |alpha - 1/2| < 1e-9. Needs at least 5 betas.
ShiftScaling shift_scaling_experiment(const DiamondParams& p, const DisorderLaw& law, std::span<const double> betas,
                                      const CriticalSearchOptions& opt = {}, int bootstrap_rounds = 1000);

}  // namespace diamondlab
