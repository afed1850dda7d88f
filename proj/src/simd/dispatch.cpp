#include "cartwright/simd_kernels.hpp"

#include <atomic>

namespace cartwright::simd {

namespace {

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

Isa detected_isa() noexcept {
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) noexcept {
  if (!cpu_supports(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

void reset_isa() noexcept { selected().store(detected_isa(), std::memory_order_relaxed); }

void inverse_half_power(std::span<const double> base, int m, std::span<double> out) {
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return avx2::inverse_half_power(base, m, out);
#endif
#if defined(__aarch64__)
    case Isa::neon: return neon::inverse_half_power(base, m, out);
#endif
    default: return scalar::inverse_half_power(base, m, out);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return avx2::dot(a, b);
#endif
#if defined(__aarch64__)
    case Isa::neon: return neon::dot(a, b);
#endif
    default: return scalar::dot(a, b);
  }
}

}  // namespace cartwright::simd
