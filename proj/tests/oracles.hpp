#pragma once

#include "episim/fpu.hpp"
#include "episim/isa.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Reference models used only by the tests.
namespace oracle {

enum class FOp { Add, Sub, Mul, Madd, Msub, Fix, Float, Abs };
const char* name(FOp op);
inline constexpr FOp kAllFOps[] = {FOp::Add, FOp::Sub, FOp::Mul, FOp::Madd,
                                   FOp::Msub, FOp::Fix, FOp::Float, FOp::Abs};

// binary32 semantics computed with MPFR. For Madd/Msub the result is
// acc +/- a*b.
epi::FpuResult fpu(FOp op, std::uint32_t acc, std::uint32_t a, std::uint32_t b, epi::RoundingMode rm);
// The simulator's function for the same operation.
epi::FpuResult dut(FOp op, std::uint32_t acc, std::uint32_t a, std::uint32_t b, epi::RoundingMode rm);

// Zeros, infinities, NaNs, subnormal edges, FLT_MAX, rounding boundaries.
const std::vector<std::uint32_t>& special_floats();
// Mix of special values, random bit patterns and nearby-exponent operands.
std::uint32_t random_float(std::mt19937_64& rng);

// Result of one ALU op. ac/av are only meaningful when the op defines them.
struct IntResult {
  std::uint32_t value = 0;
  bool an = false, az = false, ac = false, av = false;
};
// ADD SUB LSL LSR ASR EOR ORR AND BITR on 32-bit operands, computed with
// 64-bit signed and unsigned arithmetic and explicit range checks.
IntResult integer(epi::Op op, std::uint32_t a, std::uint32_t b);
// The simulator's result for the same operation, via execute().
IntResult integer_dut(epi::Op op, std::uint32_t a, std::uint32_t b);

struct Mismatch {
  std::string what;
  std::uint64_t count = 0;
};

// Runs `pairs` random operand sets per FPU op and both rounding modes.
// Returns the number of disagreeing cases and the first one described.
Mismatch fpu_sweep(std::uint64_t pairs, std::uint64_t seed);
Mismatch integer_sweep(std::uint64_t pairs, std::uint64_t seed);

} // namespace oracle
