#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace diamondlab {

/// Monte Carlo result with its standard error and the inputs that produced it.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::string model;
  double beta = 0.0;
  double h = 0.0;
  int level = 0;

  double upper(double z) const noexcept { return value + z * stderr_; }
  double lower(double z) const noexcept { return value - z * stderr_; }
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

/// Sample mean and standard error. Computed relative to the first element so
/// a constant sample gives exactly that constant and zero spread.
MeanStderr mean_stderr(std::span<const double> x);

}  // namespace diamondlab
