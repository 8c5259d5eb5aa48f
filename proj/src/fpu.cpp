#include "episim/fpu.hpp"

#include <bit>
#include <cfenv>
#include <cmath>
#include <limits>

namespace epi {

namespace {

// Runs `op` under the requested host rounding mode and collects the raised
// exceptions. Compiled with -frounding-math so the arithmetic is not folded.
template <class F>
FpuResult with_mode(RoundingMode rm, F op) {
  const int saved = std::fegetround();
  std::feclearexcept(FE_ALL_EXCEPT);
  std::fesetround(rm == RoundingMode::Truncate ? FE_TOWARDZERO : FE_TONEAREST);
  volatile float r = op();
  const int raised = std::fetestexcept(FE_OVERFLOW | FE_UNDERFLOW | FE_INEXACT);
  std::fesetround(saved);
  FpuResult out;
  const float v = r;
  if (std::isnan(v)) {
    out.bits = kCanonicalNaN;
    out.invalid = true;
    return out;
  }
  out.bits = std::bit_cast<std::uint32_t>(v);
  out.overflow = raised & FE_OVERFLOW;
  out.underflow = (raised & FE_UNDERFLOW) && (raised & FE_INEXACT);
  return out;
}

float f(std::uint32_t bits) { return std::bit_cast<float>(bits); }

} // namespace

FpuResult fpu_add(std::uint32_t a, std::uint32_t b, RoundingMode rm) {
  volatile float x = f(a), y = f(b);
  return with_mode(rm, [&] { return x + y; });
}

FpuResult fpu_sub(std::uint32_t a, std::uint32_t b, RoundingMode rm) {
  volatile float x = f(a), y = f(b);
  return with_mode(rm, [&] { return x - y; });
}

FpuResult fpu_mul(std::uint32_t a, std::uint32_t b, RoundingMode rm) {
  volatile float x = f(a), y = f(b);
  return with_mode(rm, [&] { return x * y; });
}

FpuResult fpu_madd(std::uint32_t acc, std::uint32_t a, std::uint32_t b, RoundingMode rm) {
  volatile float z = f(acc), x = f(a), y = f(b);
  return with_mode(rm, [&] { return std::fmaf(x, y, z); });
}

FpuResult fpu_msub(std::uint32_t acc, std::uint32_t a, std::uint32_t b, RoundingMode rm) {
  volatile float z = f(acc), x = f(a), y = f(b);
  return with_mode(rm, [&] { return std::fmaf(-x, y, z); });
}

FpuResult fpu_fix(std::uint32_t a, RoundingMode rm) {
  FpuResult out;
  const float v = f(a);
  if (std::isnan(v)) {
    out.invalid = true;
    return out;
  }
  const float r = rm == RoundingMode::Truncate ? std::trunc(v) : std::nearbyint(v);
  if (r >= 2147483648.0f) {
    out.bits = 0x7fffffffu;
    out.invalid = true;
  } else if (r < -2147483648.0f) {
    out.bits = 0x80000000u;
    out.invalid = true;
  } else {
    out.bits = std::uint32_t(std::int32_t(r));
  }
  return out;
}

FpuResult fpu_float(std::uint32_t a, RoundingMode rm) {
  volatile std::int32_t v = std::int32_t(a);
  return with_mode(rm, [&] { return float(v); });
}

FpuResult fpu_abs(std::uint32_t a) {
  FpuResult out;
  if (std::isnan(f(a))) {
    out.bits = kCanonicalNaN;
    out.invalid = true;
    return out;
  }
  out.bits = a & 0x7fffffffu;
  return out;
}

} // namespace epi
