// Compiled with -mavx2; only reached after a runtime CPU check.
#include "cartwright/simd_kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace cartwright::simd::avx2 {

namespace {

inline __m256d int_power(__m256d r, int k) {
  __m256d result = _mm256_set1_pd(1.0);
  __m256d factor = r;
  while (k > 0) {
    if (k & 1) result = _mm256_mul_pd(result, factor);
    factor = _mm256_mul_pd(factor, factor);
    k >>= 1;
  }
  return result;
}

inline double int_power(double r, int k) {
  double result = 1.0;
  double factor = r;
  while (k > 0) {
    if (k & 1) result *= factor;
    factor *= factor;
    k >>= 1;
  }
  return result;
}

}  // namespace

void inverse_half_power(std::span<const double> base, int m, std::span<double> out) {
  const int whole = m / 2;
  const bool half = (m % 2) != 0;
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  const std::size_t n = base.size();
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_div_pd(one, _mm256_loadu_pd(base.data() + i));
    __m256d v = int_power(r, whole);
    if (half) v = _mm256_mul_pd(v, _mm256_sqrt_pd(r));
    _mm256_storeu_pd(out.data() + i, v);
  }
  for (; i < n; ++i) {
    const double r = 1.0 / base[i];
    double v = int_power(r, whole);
    if (half) v *= std::sqrt(r);
    out[i] = v;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    // mul + add (no FMA) keeps the rounding identical to the scalar path.
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                           _mm256_loadu_pd(b.data() + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

}  // namespace cartwright::simd::avx2
