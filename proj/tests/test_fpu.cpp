#include "doctest.h"

#include "oracles.hpp"

#include <bit>

using namespace epi;

namespace {

std::uint32_t bits(float f) { return std::bit_cast<std::uint32_t>(f); }

} // namespace

TEST_SUITE("fpu") {

TEST_CASE("simple sums") {
  CHECK(fpu_add(bits(1.0f), bits(2.0f), RoundingMode::NearestEven) == FpuResult{bits(3.0f)});
  CHECK(fpu_sub(bits(1.0f), bits(1.0f), RoundingMode::Truncate).bits == 0u);
  CHECK(fpu_mul(bits(-1.5f), bits(4.0f), RoundingMode::NearestEven).bits == bits(-6.0f));
  CHECK(fpu_madd(bits(1.0f), bits(2.0f), bits(3.0f), RoundingMode::NearestEven).bits == bits(7.0f));
  CHECK(fpu_msub(bits(1.0f), bits(2.0f), bits(3.0f), RoundingMode::NearestEven).bits == bits(-5.0f));
}

TEST_CASE("overflow and invalid") {
  const FpuResult big = fpu_mul(0x7f7fffff, bits(2.0f), RoundingMode::NearestEven);
  CHECK(big.bits == 0x7f800000u);
  CHECK(big.overflow);
  const FpuResult cut = fpu_mul(0x7f7fffff, bits(2.0f), RoundingMode::Truncate);
  CHECK(cut.bits == 0x7f7fffffu);
  CHECK(cut.overflow);
  const FpuResult nan = fpu_sub(0x7f800000, 0x7f800000, RoundingMode::NearestEven);
  CHECK(nan.bits == kCanonicalNaN);
  CHECK(nan.invalid);
  CHECK(fpu_add(0x7fa00001, bits(1.0f), RoundingMode::NearestEven).bits == kCanonicalNaN);
}

TEST_CASE("truncation rounds toward zero") {
  const std::uint32_t third = bits(1.0f / 3.0f);
  const FpuResult rne = fpu_add(third, third, RoundingMode::NearestEven);
  const FpuResult rz = fpu_add(third, third, RoundingMode::Truncate);
  CHECK(rne.bits == bits(2.0f / 3.0f));
  CHECK(rz.bits <= rne.bits);
}

TEST_CASE("conversions") {
  CHECK(fpu_fix(bits(2.5f), RoundingMode::NearestEven).bits == 2u);
  CHECK(fpu_fix(bits(3.5f), RoundingMode::NearestEven).bits == 4u);
  CHECK(fpu_fix(bits(-2.7f), RoundingMode::Truncate).bits == std::uint32_t(-2));
  const FpuResult sat = fpu_fix(bits(3e9f), RoundingMode::NearestEven);
  CHECK(sat.bits == 0x7fffffffu);
  CHECK(sat.invalid);
  CHECK(fpu_float(std::uint32_t(-7), RoundingMode::NearestEven).bits == bits(-7.0f));
  CHECK(fpu_float(0x7fffffff, RoundingMode::Truncate).bits == bits(2147483520.0f));
  CHECK(fpu_abs(bits(-0.0f)).bits == 0u);
}

TEST_CASE("subnormal results flag underflow only when inexact") {
  const std::uint32_t tiny = 0x00800000; // smallest normal
  const FpuResult exact = fpu_mul(tiny, bits(0.5f), RoundingMode::NearestEven);
  CHECK(exact.bits == 0x00400000u);
  CHECK_FALSE(exact.underflow);
  const FpuResult lossy = fpu_mul(0x00800001, bits(0.5f), RoundingMode::NearestEven);
  CHECK(lossy.underflow);
}

TEST_CASE("agreement with the arbitrary-precision reference") {
  const oracle::Mismatch m = oracle::fpu_sweep(100000, 1);
  INFO(m.what);
  CHECK(m.count == 0);
}

}
