#include "cartwright/simd_kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>
#include <cmath>

namespace cartwright::simd::neon {

namespace {

inline float64x2_t int_power(float64x2_t r, int k) {
  float64x2_t result = vdupq_n_f64(1.0);
  float64x2_t factor = r;
  while (k > 0) {
    if (k & 1) result = vmulq_f64(result, factor);
    factor = vmulq_f64(factor, factor);
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
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  const std::size_t n = base.size();
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vdivq_f64(one, vld1q_f64(base.data() + i));
    float64x2_t v = int_power(r, whole);
    if (half) v = vmulq_f64(v, vsqrtq_f64(r));
    vst1q_f64(out.data() + i, v);
  }
  for (; i < n; ++i) {
    const double r = 1.0 / base[i];
    double v = int_power(r, whole);
    if (half) v *= std::sqrt(r);
    out[i] = v;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  // Two 2-lane accumulators mirror the 4-way interleave of the scalar path.
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a.data() + i + 2), vld1q_f64(b.data() + i + 2)));
  }
  double total = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(hi, 0)) +
                 (vgetq_lane_f64(lo, 1) + vgetq_lane_f64(hi, 1));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

}  // namespace cartwright::simd::neon

#endif
