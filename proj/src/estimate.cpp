#include "diamondlab/estimate.hpp"

#include <cmath>

namespace diamondlab {

MeanStderr mean_stderr(std::span<const double> x) {
  MeanStderr out;
  const std::size_t n = x.size();
  if (n == 0) return out;
  const double x0 = x[0];
  double s = 0.0;
  for (double v : x) s += v - x0;
  const double d = s / static_cast<double>(n);
  out.mean = x0 + d;
  if (n < 2) return out;
  double ss = 0.0;
  for (double v : x) {
    const double e = (v - x0) - d;
    ss += e * e;
  }
  out.variance = ss / static_cast<double>(n - 1);
  out.stderr_ = std::sqrt(out.variance / static_cast<double>(n));
  return out;
}

}  // namespace diamondlab
