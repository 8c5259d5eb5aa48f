#pragma once

#include <cstdint>

namespace epi {

enum class RoundingMode : std::uint8_t { NearestEven, Truncate };

// NaN results are always this pattern.
inline constexpr std::uint32_t kCanonicalNaN = 0x7fc00000u;

// binary32 result plus the sticky conditions it raised.
//   invalid   result is NaN (NaN operand or invalid operation); for FIX,
//             a NaN or out-of-range source
//   overflow  rounded magnitude exceeds FLT_MAX
//   underflow result tiny after rounding and inexact
struct FpuResult {
  std::uint32_t bits = 0;
  bool invalid = false;
  bool overflow = false;
  bool underflow = false;

  friend bool operator==(const FpuResult&, const FpuResult&) = default;
};

FpuResult fpu_add(std::uint32_t a, std::uint32_t b, RoundingMode rm);
FpuResult fpu_sub(std::uint32_t a, std::uint32_t b, RoundingMode rm);
FpuResult fpu_mul(std::uint32_t a, std::uint32_t b, RoundingMode rm);
// acc + a*b and acc - a*b with a single rounding.
FpuResult fpu_madd(std::uint32_t acc, std::uint32_t a, std::uint32_t b, RoundingMode rm);
FpuResult fpu_msub(std::uint32_t acc, std::uint32_t a, std::uint32_t b, RoundingMode rm);
// float -> int32, rounded per mode, saturating.
FpuResult fpu_fix(std::uint32_t a, RoundingMode rm);
// int32 -> float, rounded per mode.
FpuResult fpu_float(std::uint32_t a, RoundingMode rm);
FpuResult fpu_abs(std::uint32_t a);

} // namespace epi
