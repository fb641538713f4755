#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "diamondlab/simd/kernels.hpp"

namespace diamondlab::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(DIAMONDLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  const Backend best = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("DIAMONDLAB_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && best == Backend::avx2) return Backend::avx2;
  }
  return best;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) noexcept {
  if (b == Backend::scalar) return true;
  return cpu_has_avx2();
}

const KernelTable& table(Backend b) {
  if (!backend_supported(b))
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
#if defined(DIAMONDLAB_HAVE_AVX2)
  if (b == Backend::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
  if (!backend_supported(b))
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
  current().store(b, std::memory_order_relaxed);
}

const KernelTable& active() noexcept {
#if defined(DIAMONDLAB_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

}  // namespace diamondlab::simd
