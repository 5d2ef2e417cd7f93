#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "wmforge/kernels.hpp"

namespace wmforge::kernels::avx2 {

namespace {

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  return std::min(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// exp(x) by Cody-Waite reduction to |r| <= ln2/2 and a degree-13 Taylor
// polynomial; within 2 ulp of std::exp. Inputs below -708.39 flush to 0.
inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.39), _CMP_LT_OQ);
  x = _mm256_min_pd(x, _mm256_set1_pd(709.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.39));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(0.693145751953125), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);

  static constexpr double c[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i e = _mm256_cvtepi32_epi64(ni);
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  const __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
  return _mm256_andnot_pd(underflow, res);
}

}  // namespace

double reduce_max(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t i = 0;
  double m = -std::numeric_limits<double>::infinity();
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(p + i));
    m = hmax(acc);
  }
  for (; i < n; ++i) m = std::max(m, p[i]);
  return m;
}

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t i = 0;
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += p[i];
  return s;
}

MinMax minmax(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t i = 0;
  MinMax r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  if (n >= 4) {
    __m256d lo = _mm256_set1_pd(r.min);
    __m256d hi = _mm256_set1_pd(r.max);
    for (; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(p + i);
      lo = _mm256_min_pd(lo, v);
      hi = _mm256_max_pd(hi, v);
    }
    r.min = hmin(lo);
    r.max = hmax(hi);
  }
  for (; i < n; ++i) {
    r.min = std::min(r.min, p[i]);
    r.max = std::max(r.max, p[i]);
  }
  return r;
}

double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out) {
  const std::size_t n = x.size();
  const double* p = x.data();
  double* o = out.data();
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vk = _mm256_set1_pd(scale);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(p + i), vs), vk));
    _mm256_storeu_pd(o + i, e);
    acc = _mm256_add_pd(acc, e);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    o[i] = std::exp((p[i] - shift) * scale);
    s += o[i];
  }
  return s;
}

void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta) {
  const std::size_t n = x.size();
  double* p = x.data();
  const std::uint8_t* m = mask.data();
  const __m256d vd = _mm256_set1_pd(delta);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::int32_t bits;
    __builtin_memcpy(&bits, m + i, 4);
    const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(bits));
    const __m256i is_zero = _mm256_cmpeq_epi64(wide, zero);
    const __m256d add = _mm256_andnot_pd(_mm256_castsi256_pd(is_zero), vd);
    _mm256_storeu_pd(p + i, _mm256_add_pd(_mm256_loadu_pd(p + i), add));
  }
  for (; i < n; ++i)
    if (m[i]) p[i] += delta;
}

void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vstep = _mm256_set1_pd(step);
  const __m256d vtop = _mm256_set1_pd(static_cast<double>(max_level));
  const __m256d vzero = _mm256_setzero_pd();
  alignas(16) std::int32_t tmp[4];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d k = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(p + i), vlo), vstep);
    k = _mm256_round_pd(k, _MM_FROUND_CUR_DIRECTION);
    k = _mm256_min_pd(_mm256_max_pd(k, vzero), vtop);
    _mm_store_si128(reinterpret_cast<__m128i*>(tmp), _mm256_cvtpd_epi32(k));
    for (int j = 0; j < 4; ++j) out[i + j] = static_cast<std::uint8_t>(tmp[j]);
  }
  const double top = static_cast<double>(max_level);
  for (; i < n; ++i) {
    const double k = std::nearbyint((p[i] - lo) / step);
    out[i] = static_cast<std::uint8_t>(std::clamp(k, 0.0, top));
  }
}

}  // namespace wmforge::kernels::avx2
