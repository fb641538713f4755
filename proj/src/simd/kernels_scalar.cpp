#include "diamondlab/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diamondlab::simd {
namespace {

void exp_affine(const double* x, double* out, std::size_t n, double a, double b) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a * x[i] + b);
}

inline double logaddexp(double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

void log_add_const(const double* x, double* out, std::size_t n, double c, double shift) {
  for (std::size_t i = 0; i < n; ++i) out[i] = logaddexp(x[i], c) + shift;
}

void log_add_exp(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = logaddexp(x[i], y[i]);
}

void pair_sum(const double* in, double* out, std::size_t n) {
  if (n == 0) {
    out[0] = 0.0;
    return;
  }
  out[0] = in[0];
  for (std::size_t j = 1; j < n; ++j) out[j] = in[j - 1] + in[j];
  out[n] = in[n - 1];
}

void mul_scaled(const double* a, const double* b, double* out, std::size_t n, double s) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i] * b[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(double* x, std::size_t n, double factor) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= factor;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double exp_weighted_sum(const double* k, std::size_t n, double x, double first) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += k[i] * std::exp(-(first + static_cast<double>(i)) * x);
  return acc;
}

constexpr KernelTable kTable{exp_affine, log_add_const, log_add_exp, pair_sum, mul_scaled, add,
                             scale,      sum,           max,         dot,      exp_weighted_sum};

}  // namespace

const KernelTable& detail::scalar_table() noexcept { return kTable; }

}  // namespace diamondlab::simd
