#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epi {

enum class Op : std::uint8_t {
  FADD, FSUB, FMUL, FMADD, FMSUB, FIX, FLOAT, FABS,
  ADD, SUB, LSL, LSR, ASR, EOR, ORR, AND, BITR,
  NOP, MOV, MOVT, MOVFS, MOVTS, TESTSET, LDR, STR,
  B, BL, JR, JALR,
  IDLE, TRAP, BKPT, RTI, GID, GIE, UNIMPL,
  SYNC, MBKPT, WAND,
};
inline constexpr unsigned kOpCount = unsigned(Op::WAND) + 1;

const char* mnemonic(Op op);

// Condition codes. The integer conditions follow the usual carry = not-borrow
// convention for SUB; the F* conditions read the floating-point flags.
enum class Cond : std::uint8_t {
  EQ, NE, GTU, GTEU, LTEU, LTU, GT, GTE, LT, LTE,
  FEQ, FNE, FLT, FLTE, AL, Reserved,
};

const char* suffix(Cond c); // "" for AL

enum class Width : std::uint8_t { B8, B16, B32, B64 };

constexpr unsigned bytes_of(Width w) { return 1u << unsigned(w); }

enum class AddrMode : std::uint8_t { Displacement, Index, Postmodify };

enum class OpClass { Fpu, Integer, LoadStore, Control, Nop };

OpClass op_class(Op op);

// Decoded instruction. Fields an operation does not use stay at their
// defaults, so equality is meaningful for round-trip checks.
//
//   R3 ops            rd, rn, rm
//   R2 ops            rd, rn            (FIX FLOAT FABS BITR)
//   ADD/SUB/shifts    rd, rn, imm       when use_imm
//   MOV               rd, rn + cond     or rd, imm (use_imm, cond AL)
//   MOVT              rd, imm           (upper 16 bits)
//   MOVFS / MOVTS     rd / rn, imm = special register number
//   LDR/STR           rd, [rn, rm|imm], width, amode; imm is in bytes
//   TESTSET           rd, [rn, rm]
//   B / BL            cond (B only), imm = byte displacement from this PC
//   JR / JALR         rn
//   TRAP              imm = trap code
struct Instruction {
  Op op = Op::NOP;
  std::uint8_t rd = 0;
  std::uint8_t rn = 0;
  std::uint8_t rm = 0;
  std::int32_t imm = 0;
  bool use_imm = false;
  Cond cond = Cond::AL;
  Width width = Width::B32;
  AddrMode amode = AddrMode::Displacement;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Convenience constructors used by tests and the kernel builders.
namespace ins {
Instruction r3(Op op, unsigned rd, unsigned rn, unsigned rm);
Instruction r2(Op op, unsigned rd, unsigned rn);
Instruction ri(Op op, unsigned rd, unsigned rn, std::int32_t imm);
Instruction mov(unsigned rd, unsigned rn, Cond c = Cond::AL);
Instruction movi(unsigned rd, std::uint32_t imm16);
Instruction movt(unsigned rd, std::uint32_t imm16);
Instruction movfs(unsigned rd, unsigned sreg);
Instruction movts(unsigned sreg, unsigned rn);
Instruction mem(Op op, unsigned rd, unsigned rn, Width w, AddrMode m, std::int32_t imm_or_rm);
Instruction testset(unsigned rd, unsigned rn, unsigned rm);
Instruction branch(Cond c, std::int32_t disp);
Instruction bl(std::int32_t disp);
Instruction jr(Op op, unsigned rn);
Instruction trap(unsigned code);
Instruction bare(Op op);
} // namespace ins

// The general registers the instruction reads / writes (implicit link
// register included). Used by dual-issue and interlock checks.
struct RegUse {
  std::vector<std::uint8_t> reads;
  std::vector<std::uint8_t> writes;
};
RegUse reg_use(const Instruction& i);

bool is_branch(Op op);

struct EncodedInstruction {
  std::array<std::uint16_t, 2> halfwords{};
  unsigned count = 1;

  std::span<const std::uint16_t> view() const { return {halfwords.data(), count}; }
  unsigned bytes() const { return count * 2; }
  friend bool operator==(const EncodedInstruction&, const EncodedInstruction&) = default;
};

// Length in halfwords implied by the first halfword.
constexpr unsigned encoded_length(std::uint16_t first) { return (first & 1u) ? 2 : 1; }

// True when the instruction has a 16-bit form for its operands.
bool fits_short(const Instruction& i);

// Throws Error(ImmediateOutOfRange) when no form can hold the operands and
// Error(IllegalOpcode) for malformed instructions (bad register, odd 64-bit
// register pair, reserved condition).
EncodedInstruction encode(const Instruction& i);

struct Decoded {
  Instruction instr;  // UNIMPL when !legal
  unsigned length = 1; // halfwords consumed
  bool legal = true;
};

// Total over any input with at least one halfword: reserved or non-canonical
// encodings yield legal == false. A 32-bit form whose second halfword is
// missing decodes as illegal with length 1.
Decoded decode(std::span<const std::uint16_t> halfwords);

std::string format_instruction(const Instruction& i);

// Special registers reachable through MOVFS / MOVTS.
namespace sreg {
inline constexpr unsigned CONFIG = 0;
inline constexpr unsigned STATUS = 1;
inline constexpr unsigned PC = 2;
inline constexpr unsigned IRET = 3;
inline constexpr unsigned IMASK = 4;
inline constexpr unsigned ILAT = 5;
inline constexpr unsigned ILATCL = 6;
inline constexpr unsigned IPEND = 7;
inline constexpr unsigned CTIMER0 = 8;
inline constexpr unsigned CTIMER1 = 9;
inline constexpr unsigned MULTICAST = 10;
inline constexpr unsigned COREID = 11;
inline constexpr unsigned CYCLES = 12;
// DMA channel n occupies DMA_BASE + 8*n + field.
inline constexpr unsigned DMA_BASE = 16;
inline constexpr unsigned DMA_SRC = 0;
inline constexpr unsigned DMA_DST = 1;
inline constexpr unsigned DMA_COUNT = 2;
inline constexpr unsigned DMA_STRIDE = 3;
inline constexpr unsigned DMA_CONFIG = 4;
inline constexpr unsigned DMA_STATUS = 5;

std::optional<unsigned> parse(const std::string& name);
std::string name(unsigned index);
} // namespace sreg

inline constexpr unsigned kLinkRegister = 14;
inline constexpr unsigned kStackRegister = 13;

} // namespace epi
