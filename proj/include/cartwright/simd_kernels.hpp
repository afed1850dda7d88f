#pragma once

// Data-parallel inner loops of the kernel quadratures.
//
// Every kernel has a scalar reference implementation; vectorized variants
// (AVX2 on x86-64, NEON on aarch64) are selected once at runtime and must
// agree with the scalar path (bit-exact for elementwise kernels, to a few
// ulps of the magnitude sum for reductions).

#include <cstddef>
#include <span>
#include <string_view>

namespace cartwright::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

// Best instruction set supported by this binary on this CPU.
Isa detected_isa() noexcept;

// Instruction set currently used by the dispatching entry points.
Isa active_isa() noexcept;

// Pin dispatch to `isa` (tests, benchmarks). Returns false, leaving the
// selection untouched, if the CPU or the build cannot run it.
bool force_isa(Isa isa) noexcept;
void reset_isa() noexcept;

// out[i] = base[i]^(-m/2) for m >= 0. Bases must be positive.
void inverse_half_power(std::span<const double> base, int m, std::span<double> out);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

namespace scalar {
void inverse_half_power(std::span<const double> base, int m, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void inverse_half_power(std::span<const double> base, int m, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void inverse_half_power(std::span<const double> base, int m, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace neon
#endif

}  // namespace cartwright::simd
