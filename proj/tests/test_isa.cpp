#include "doctest.h"

#include "episim/error.hpp"
#include "episim/isa.hpp"

#include <random>
#include <vector>

using namespace epi;

namespace {

Instruction round_trip(const Instruction& i) {
  const EncodedInstruction e = encode(i);
  const Decoded d = decode(e.view());
  REQUIRE(d.legal);
  REQUIRE(d.length == e.count);
  return d.instr;
}

} // namespace

TEST_SUITE("isa") {

TEST_CASE("low registers take the 16-bit form") {
  CHECK(encode(ins::r3(Op::ADD, 1, 2, 3)).count == 1);
  CHECK(encode(ins::r3(Op::ADD, 10, 2, 3)).count == 2);
  CHECK(encode(ins::r3(Op::FMADD, 0, 4, 5)).count == 1);
  CHECK(encode(ins::r3(Op::FMADD, 0, 4, 63)).count == 2);
  CHECK(encode(ins::bare(Op::NOP)).count == 1);
}

TEST_CASE("immediate ranges pick the form") {
  CHECK(encode(ins::ri(Op::ADD, 1, 1, 7)).count == 1);
  CHECK(encode(ins::ri(Op::ADD, 1, 1, -8)).count == 1);
  CHECK(encode(ins::ri(Op::ADD, 1, 1, 8)).count == 2);
  CHECK(encode(ins::ri(Op::ADD, 1, 1, 2047)).count == 2);
  CHECK(encode(ins::ri(Op::ADD, 1, 1, -2048)).count == 2);
  CHECK_THROWS_AS(encode(ins::ri(Op::ADD, 1, 1, 2048)), Error);
  CHECK(encode(ins::movi(0, 127)).count == 1);
  CHECK(encode(ins::movi(0, 128)).count == 2);
  CHECK(encode(ins::movi(0, 0xFFFF)).count == 2);
  CHECK(encode(ins::branch(Cond::NE, -64)).count == 1);
  CHECK(encode(ins::branch(Cond::NE, -66)).count == 2);
  CHECK_THROWS_AS(encode(ins::branch(Cond::AL, 3)), Error);
  CHECK_THROWS_AS(encode(ins::trap(64)), Error);
}

TEST_CASE("every operation survives encode and decode") {
  const std::vector<Instruction> cases = {
      ins::r3(Op::FADD, 1, 2, 3),     ins::r3(Op::FSUB, 40, 41, 42), ins::r3(Op::FMUL, 7, 0, 63),
      ins::r3(Op::FMADD, 60, 4, 5),   ins::r3(Op::FMSUB, 2, 3, 4),   ins::r2(Op::FIX, 9, 10),
      ins::r2(Op::FLOAT, 1, 2),       ins::r2(Op::FABS, 33, 34),     ins::r3(Op::ADD, 1, 2, 3),
      ins::r3(Op::SUB, 20, 21, 22),   ins::r3(Op::LSL, 1, 2, 3),     ins::r3(Op::LSR, 1, 2, 3),
      ins::r3(Op::ASR, 1, 2, 3),      ins::r3(Op::EOR, 1, 2, 3),     ins::r3(Op::ORR, 50, 2, 3),
      ins::r3(Op::AND, 1, 2, 3),      ins::r2(Op::BITR, 1, 2),       ins::ri(Op::ADD, 3, 4, -5),
      ins::ri(Op::SUB, 3, 4, 1000),   ins::ri(Op::LSL, 3, 4, 31),    ins::ri(Op::LSR, 30, 4, 1),
      ins::ri(Op::ASR, 3, 4, 17),     ins::mov(1, 2),                ins::mov(20, 21, Cond::GTU),
      ins::movi(5, 100),              ins::movi(45, 0xBEEF),         ins::movt(5, 0x1234),
      ins::movfs(5, sreg::CYCLES),    ins::movts(sreg::CONFIG, 9),   ins::movfs(1, 16 + 8 + 5),
      ins::testset(1, 2, 3),          ins::branch(Cond::EQ, 10),     ins::branch(Cond::LTE, -1000),
      ins::branch(Cond::AL, 2),       ins::bl(-4000),                ins::jr(Op::JR, 14),
      ins::jr(Op::JALR, 3),           ins::trap(0),                  ins::trap(63),
      ins::bare(Op::NOP),             ins::bare(Op::IDLE),           ins::bare(Op::BKPT),
      ins::bare(Op::RTI),             ins::bare(Op::GID),            ins::bare(Op::GIE),
      ins::bare(Op::SYNC),            ins::bare(Op::MBKPT),          ins::bare(Op::WAND),
      ins::mem(Op::LDR, 1, 2, Width::B32, AddrMode::Displacement, 8),
      ins::mem(Op::LDR, 1, 2, Width::B32, AddrMode::Displacement, -512),
      ins::mem(Op::STR, 2, 3, Width::B64, AddrMode::Displacement, 1016),
      ins::mem(Op::STR, 1, 2, Width::B8, AddrMode::Index, 3),
      ins::mem(Op::LDR, 1, 2, Width::B16, AddrMode::Postmodify, 6),
      ins::mem(Op::STR, 40, 41, Width::B32, AddrMode::Postmodify, -4),
  };
  for (const Instruction& i : cases) {
    INFO(format_instruction(i));
    CHECK(round_trip(i) == i);
  }
}

TEST_CASE("random operand sweeps round-trip") {
  std::mt19937_64 rng(11);
  const Op r3ops[] = {Op::FADD, Op::FSUB, Op::FMUL, Op::FMADD, Op::FMSUB, Op::ADD,
                      Op::SUB,  Op::LSL,  Op::LSR,  Op::ASR,   Op::EOR,   Op::ORR, Op::AND};
  for (int k = 0; k < 20000; ++k) {
    const Op op = r3ops[rng() % std::size(r3ops)];
    const Instruction i = ins::r3(op, unsigned(rng() % 64), unsigned(rng() % 64), unsigned(rng() % 64));
    REQUIRE(round_trip(i) == i);
    const std::int32_t disp = std::int32_t(rng() % (1u << 20)) - (1 << 19);
    const Instruction b = ins::branch(Cond(rng() % 15), disp * 2);
    REQUIRE(round_trip(b) == b);
  }
}

TEST_CASE("decoder is total over every 16- and 32-bit pattern sample") {
  for (std::uint32_t h = 0; h < 0x10000; ++h) {
    const std::uint16_t one[1] = {std::uint16_t(h)};
    const Decoded d = decode(one);
    CHECK(d.length == 1);
    if (d.legal) {
      // A legal short decode re-encodes to the same halfword.
      const EncodedInstruction e = encode(d.instr);
      CHECK(e.count == 1);
      CHECK(e.halfwords[0] == h);
    }
  }
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200000; ++k) {
    const std::uint16_t two[2] = {std::uint16_t(rng() | 1), std::uint16_t(rng())};
    const Decoded d = decode(two);
    REQUIRE(d.length >= 1);
    REQUIRE(d.length <= 2);
    if (d.legal) {
      const EncodedInstruction e = encode(d.instr);
      REQUIRE(e.count == d.length);
      REQUIRE(e.halfwords[0] == two[0]);
      if (e.count == 2) REQUIRE(e.halfwords[1] == two[1]);
    } else {
      REQUIRE(d.instr.op == Op::UNIMPL);
    }
  }
}

TEST_CASE("a 32-bit form missing its second halfword is illegal") {
  const EncodedInstruction e = encode(ins::r3(Op::ADD, 10, 11, 12));
  REQUIRE(e.count == 2);
  const std::uint16_t cut[1] = {e.halfwords[0]};
  const Decoded d = decode(cut);
  CHECK_FALSE(d.legal);
  CHECK(d.length == 1);
}

TEST_CASE("malformed instructions are rejected") {
  CHECK_THROWS_AS(encode(ins::r3(Op::ADD, 64, 0, 0)), Error);
  CHECK_THROWS_AS(encode(ins::mem(Op::LDR, 3, 0, Width::B64, AddrMode::Displacement, 0)), Error);
  CHECK_THROWS_AS(encode(ins::branch(Cond::Reserved, 4)), Error);
}

TEST_CASE("register use") {
  const RegUse a = reg_use(ins::r3(Op::ADD, 1, 2, 3));
  CHECK(a.reads == std::vector<std::uint8_t>{2, 3});
  CHECK(a.writes == std::vector<std::uint8_t>{1});
  const RegUse m = reg_use(ins::r3(Op::FMADD, 4, 5, 6));
  CHECK(m.reads.size() == 3);
  const RegUse l = reg_use(ins::bl(8));
  CHECK(l.writes == std::vector<std::uint8_t>{std::uint8_t(kLinkRegister)});
}

TEST_CASE("special register names") {
  CHECK(sreg::parse("CYCLES") == sreg::CYCLES);
  CHECK(sreg::parse("IMASK") == sreg::IMASK);
  CHECK(sreg::name(sreg::COREID) == "COREID");
  CHECK(sreg::parse(sreg::name(16 + 8 + 2)) == 16u + 8 + 2);
  CHECK_FALSE(sreg::parse("BOGUS").has_value());
}

}
