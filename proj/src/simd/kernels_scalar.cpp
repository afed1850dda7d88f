#include "cartwright/simd_kernels.hpp"

#include <cmath>

namespace cartwright::simd::scalar {

namespace {

// r^k by binary powering; the vector variants use the same multiplication
// sequence so elementwise results match bit for bit.
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
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double r = 1.0 / base[i];
    double v = int_power(r, whole);
    if (half) v *= std::sqrt(r);
    out[i] = v;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  // Four interleaved partial sums, combined pairwise, so the reduction
  // order matches a 4-lane vector accumulator.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

}  // namespace cartwright::simd::scalar
