// AVX2 variants of the kernels in kernels_scalar.cpp. This translation unit is
// compiled with -mavx2 -mfma and is only entered after a runtime CPU check.
//
// exp/log follow the Cephes double-precision rational approximations; they
// agree with libm to a few ulp on the ranges used by the simulators.

#include "diamondlab/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace diamondlab::simd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline __m256d polevl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_set1_pd(c[0]);
  for (int i = 1; i <= degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// Monic leading coefficient.
inline __m256d p1evl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
  for (int i = 1; i < degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// 2^52 + 2^51; built per call so no AVX code runs during static initialization.
inline __m256d magic() { return _mm256_set1_pd(6755399441055744.0); }

// Integral-valued double (|k| < 2^51) to int64 lanes.
inline __m256i to_int64(__m256d k) {
  return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic())), _mm256_castpd_si256(magic()));
}

inline __m256d to_double(__m256i k) {
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(k, _mm256_castpd_si256(magic()))), magic());
}

// 2^k for integral k in the normal exponent range.
inline __m256d pow2(__m256d k) {
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(to_int64(k), _mm256_set1_epi64x(1023)), 52);
  return _mm256_castsi256_pd(bits);
}

inline __m256d exp_pd(__m256d x) {
  static constexpr double P[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                                 9.99999999999999999910e-1};
  static constexpr double Q[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                                 2.27265548208155028766e-1, 2.00000000000000000009e0};
  const __m256d hi = _mm256_set1_pd(709.78);
  const __m256d lo = _mm256_set1_pd(-745.2);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(1.4426950408889634073599)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), xc);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(r, polevl(rr, P, 2));
  const __m256d qx = polevl(rr, Q, 3);
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  // Split the scaling so both factors stay normal down to the subnormal range.
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  e = _mm256_mul_pd(_mm256_mul_pd(e, pow2(n1)), pow2(n2));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(kInf), _mm256_cmp_pd(x, hi, _CMP_GT_OQ));
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), _mm256_cmp_pd(x, lo, _CMP_LT_OQ));
  return _mm256_blendv_pd(e, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
}

inline __m256d log_pd(__m256d x) {
  static constexpr double P[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                                 4.70579119878881725854e0,  1.44989225341610930846e1,
                                 1.79368678507819816313e1,  7.70838733755885391666e0};
  static constexpr double Q[] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                                 8.29875266912776603211e1, 7.11544750618563894466e1,
                                 2.31251620126765340583e1};
  const double kMinNormal = std::numeric_limits<double>::min();

  // Rescale subnormals into the normal range.
  const __m256d sub = _mm256_cmp_pd(x, _mm256_set1_pd(kMinNormal), _CMP_LT_OQ);
  const __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(18014398509481984.0)), sub);
  const __m256d e_adj = _mm256_and_pd(sub, _mm256_set1_pd(54.0));

  const __m256i bits = _mm256_castpd_si256(xs);
  const __m256i exp_bits = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7FF));
  __m256d e = _mm256_sub_pd(to_double(_mm256_sub_epi64(exp_bits, _mm256_set1_epi64x(1022))), e_adj);
  const __m256i mant_bits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                            _mm256_set1_epi64x(0x3FE0000000000000LL));
  const __m256d m = _mm256_castsi256_pd(mant_bits);  // in [0.5, 1)

  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d r = _mm256_blendv_pd(_mm256_sub_pd(m, one), _mm256_sub_pd(_mm256_add_pd(m, m), one), small);

  const __m256d z = _mm256_mul_pd(r, r);
  __m256d y = _mm256_mul_pd(r, _mm256_div_pd(_mm256_mul_pd(z, polevl(r, P, 5)), p1evl(r, Q, 5)));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d out = _mm256_add_pd(r, y);
  out = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), out);

  out = _mm256_blendv_pd(out, _mm256_set1_pd(-kInf), _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ));
  out = _mm256_blendv_pd(out, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()),
                         _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_NGE_UQ));
  return _mm256_blendv_pd(out, x, _mm256_cmp_pd(x, _mm256_set1_pd(kInf), _CMP_EQ_OQ));
}

// log(1 + t) for t >= 0 via the log(u) * t / (u - 1) correction.
inline __m256d log1p_pd(__m256d t) {
  const __m256d u = _mm256_add_pd(_mm256_set1_pd(1.0), t);
  const __m256d d = _mm256_sub_pd(u, _mm256_set1_pd(1.0));
  const __m256d corrected = _mm256_div_pd(_mm256_mul_pd(log_pd(u), t), d);
  return _mm256_blendv_pd(corrected, t, _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_EQ_OQ));
}

inline __m256d logaddexp_pd(__m256d a, __m256d b) {
  const __m256d hi = _mm256_max_pd(a, b);
  const __m256d lo = _mm256_min_pd(a, b);
  const __m256d res = _mm256_add_pd(hi, log1p_pd(exp_pd(_mm256_sub_pd(lo, hi))));
  return _mm256_blendv_pd(res, hi, _mm256_cmp_pd(hi, _mm256_set1_pd(-kInf), _CMP_EQ_OQ));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void exp_affine(const double* x, double* out, std::size_t n, double a, double b) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp_pd(_mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), vb)));
  for (; i < n; ++i) out[i] = std::exp(a * x[i] + b);
}

void log_add_const(const double* x, double* out, std::size_t n, double c, double shift) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(logaddexp_pd(_mm256_loadu_pd(x + i), vc), vs));
  for (; i < n; ++i) {
    const double hi = std::max(x[i], c);
    const double lo = std::min(x[i], c);
    out[i] = (hi == -kInf ? hi : hi + std::log1p(std::exp(lo - hi))) + shift;
  }
}

void log_add_exp(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, logaddexp_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) {
    const double hi = std::max(x[i], y[i]);
    const double lo = std::min(x[i], y[i]);
    out[i] = hi == -kInf ? hi : hi + std::log1p(std::exp(lo - hi));
  }
}

void pair_sum(const double* in, double* out, std::size_t n) {
  if (n == 0) {
    out[0] = 0.0;
    return;
  }
  out[0] = in[0];
  std::size_t j = 1;
  for (; j + 4 <= n; j += 4)
    _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(in + j - 1), _mm256_loadu_pd(in + j)));
  for (; j < n; ++j) out[j] = in[j - 1] + in[j];
  out[n] = in[n - 1];
}

void mul_scaled(const double* a, const double* b, double* out, std::size_t n, double s) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(a + i)), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = s * a[i] * b[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(double* x, std::size_t n, double factor) {
  const __m256d vf = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vf));
  for (; i < n; ++i) x[i] *= factor;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double max(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double exp_weighted_sum(const double* k, std::size_t n, double x, double first) {
  const __m256d vx = _mm256_set1_pd(-x);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d idx = _mm256_add_pd(_mm256_set1_pd(first), _mm256_setr_pd(0.0, 1.0, 2.0, 3.0));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(k + i), exp_pd(_mm256_mul_pd(idx, vx)), acc);
    idx = _mm256_add_pd(idx, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += k[i] * std::exp(-(first + static_cast<double>(i)) * x);
  return s;
}

constexpr KernelTable kTable{exp_affine, log_add_const, log_add_exp, pair_sum, mul_scaled, add,
                             scale,      sum,           max,         dot,      exp_weighted_sum};

}  // namespace

const KernelTable& detail::avx2_table() noexcept { return kTable; }

}  // namespace diamondlab::simd
