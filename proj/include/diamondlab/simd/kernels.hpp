#pragma once

// Data-parallel inner loops shared by the simulators.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is picked once at startup from the CPU features
// and the DIAMONDLAB_SIMD environment variable ("scalar" or "avx2"); tests
// reach each variant directly through table().

#include <cstddef>
#include <span>
#include <string_view>

namespace diamondlab::simd {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b) noexcept;

/// Raw kernel entry points. Lengths are element counts; output arrays may
/// alias the first input unless noted.
struct KernelTable {
  // out[i] = exp(a * x[i] + b)
  void (*exp_affine)(const double* x, double* out, std::size_t n, double a, double b);
  // out[i] = log(exp(x[i]) + exp(c)) + shift
  void (*log_add_const)(const double* x, double* out, std::size_t n, double c, double shift);
  // out[i] = log(exp(x[i]) + exp(y[i]))
  void (*log_add_exp)(const double* x, const double* y, double* out, std::size_t n);
  // out[j] = in[j-1] + in[j] for j = 0..n with in[-1] = in[n] = 0; out has n+1 slots,
  // must not alias in.
  void (*pair_sum)(const double* in, double* out, std::size_t n);
  // out[i] = scale * a[i] * b[i]
  void (*mul_scaled)(const double* a, const double* b, double* out, std::size_t n, double scale);
  // out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // x[i] *= factor
  void (*scale)(double* x, std::size_t n, double factor);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i k[i] * exp(-(first + i) * x)
  double (*exp_weighted_sum)(const double* k, std::size_t n, double x, double first);
};

bool backend_supported(Backend b) noexcept;

/// Kernel table of a specific backend. Throws std::invalid_argument if the
/// backend is not compiled in or not supported by the running CPU.
const KernelTable& table(Backend b);

Backend active_backend() noexcept;

/// Overrides the runtime selection (tests, `--simd` flag).
void set_active_backend(Backend b);

const KernelTable& active() noexcept;

// Span front-ends over the active table.

inline void exp_affine(std::span<const double> x, std::span<double> out, double a, double b) {
  active().exp_affine(x.data(), out.data(), x.size(), a, b);
}
inline void log_add_const(std::span<const double> x, std::span<double> out, double c, double shift) {
  active().log_add_const(x.data(), out.data(), x.size(), c, shift);
}
inline void log_add_exp(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active().log_add_exp(x.data(), y.data(), out.data(), x.size());
}
inline void pair_sum(std::span<const double> in, std::span<double> out) {
  active().pair_sum(in.data(), out.data(), in.size());
}
inline void mul_scaled(std::span<const double> a, std::span<const double> b, std::span<double> out,
                       double s) {
  active().mul_scaled(a.data(), b.data(), out.data(), a.size(), s);
}
inline void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().add(a.data(), b.data(), out.data(), a.size());
}
inline void scale(std::span<double> x, double factor) { active().scale(x.data(), x.size(), factor); }
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double max(std::span<const double> x) { return active().max(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double exp_weighted_sum(std::span<const double> k, double x, double first) {
  return active().exp_weighted_sum(k.data(), k.size(), x, first);
}

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(DIAMONDLAB_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace diamondlab::simd
