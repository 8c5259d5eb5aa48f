#include "doctest.h"

#include "oracles.hpp"

#include "episim/semantics.hpp"

using namespace epi;

namespace {

class NullPort final : public DataPort {
public:
  LoadResult load(std::uint32_t, Width) override { return {Access::Fault, 0}; }
  Access store(std::uint32_t, Width, std::uint64_t) override { return Access::Fault; }
  LoadResult testset(std::uint32_t, std::uint32_t) override { return {Access::Fault, 0}; }
  std::uint32_t read_device(unsigned) override { return 0; }
  void write_device(unsigned, std::uint32_t) override {}
};

Flags flags_of(unsigned bits) {
  Flags f;
  f.an = bits & 1;
  f.az = bits & 2;
  f.av = bits & 4;
  f.ac = bits & 8;
  f.bn = bits & 16;
  f.bz = bits & 32;
  return f;
}

} // namespace

TEST_SUITE("semantics") {

TEST_CASE("add and subtract examples") {
  const auto add = oracle::integer_dut(Op::ADD, 0x7fffffff, 1);
  CHECK(add.value == 0x80000000u);
  CHECK(add.av);
  CHECK(add.an);
  CHECK_FALSE(add.ac);
  const auto wrap = oracle::integer_dut(Op::ADD, 0xffffffff, 1);
  CHECK(wrap.value == 0u);
  CHECK(wrap.az);
  CHECK(wrap.ac);
  const auto sub = oracle::integer_dut(Op::SUB, 3, 5);
  CHECK(sub.value == std::uint32_t(-2));
  CHECK(sub.an);
  CHECK_FALSE(sub.ac);
  CHECK(oracle::integer_dut(Op::SUB, 5, 3).ac);
  CHECK(oracle::integer_dut(Op::ASR, 0x80000000, 31).value == 0xffffffffu);
  CHECK(oracle::integer_dut(Op::BITR, 1, 0).value == 0x80000000u);
}

TEST_CASE("agreement with the wide-arithmetic reference") {
  const oracle::Mismatch m = oracle::integer_sweep(200000, 2);
  INFO(m.what);
  CHECK(m.count == 0);
}

TEST_CASE("complementary condition pairs") {
  const std::pair<Cond, Cond> pairs[] = {
      {Cond::EQ, Cond::NE}, {Cond::GTU, Cond::LTEU}, {Cond::GTEU, Cond::LTU},
      {Cond::GT, Cond::LTE}, {Cond::GTE, Cond::LT}, {Cond::FEQ, Cond::FNE},
  };
  for (unsigned b = 0; b < 64; ++b) {
    const Flags f = flags_of(b);
    CHECK(eval_condition(Cond::AL, f));
    for (auto [c, d] : pairs) {
      INFO("flags " << b << " cond " << suffix(c));
      CHECK(eval_condition(c, f) != eval_condition(d, f));
    }
  }
}

TEST_CASE("conditions after SUB match unsigned and signed comparison") {
  NullPort port;
  const std::uint32_t vals[] = {0, 1, 2, 0x7fffffff, 0x80000000, 0xfffffffe, 0xffffffff, 1000};
  for (std::uint32_t a : vals) {
    for (std::uint32_t b : vals) {
      ArchState s;
      s.r[1] = a;
      s.r[2] = b;
      execute(ins::r3(Op::SUB, 3, 1, 2), 2, s, port);
      const auto sa = std::int32_t(a), sb = std::int32_t(b);
      CHECK(eval_condition(Cond::EQ, s.flags) == (a == b));
      CHECK(eval_condition(Cond::GTU, s.flags) == (a > b));
      CHECK(eval_condition(Cond::GTEU, s.flags) == (a >= b));
      CHECK(eval_condition(Cond::LTU, s.flags) == (a < b));
      CHECK(eval_condition(Cond::GT, s.flags) == (sa > sb));
      CHECK(eval_condition(Cond::GTE, s.flags) == (sa >= sb));
      CHECK(eval_condition(Cond::LT, s.flags) == (sa < sb));
      CHECK(eval_condition(Cond::LTE, s.flags) == (sa <= sb));
    }
  }
}

TEST_CASE("floating conditions follow the FPU flags") {
  NullPort port;
  ArchState s;
  s.r[1] = 0x3f800000;
  s.r[2] = 0x40000000;
  execute(ins::r3(Op::FSUB, 3, 1, 2), 4, s, port);
  CHECK(s.flags.bn);
  CHECK(eval_condition(Cond::FLT, s.flags));
  CHECK_FALSE(eval_condition(Cond::FEQ, s.flags));
  execute(ins::r3(Op::FSUB, 3, 1, 1), 4, s, port);
  CHECK(s.flags.bz);
  CHECK(eval_condition(Cond::FEQ, s.flags));
  CHECK(eval_condition(Cond::FLTE, s.flags));
}

TEST_CASE("branches and links") {
  NullPort port;
  ArchState s;
  s.pc = 0x100;
  Effect e = execute(ins::bl(0x40), 4, s, port);
  CHECK(e.next_pc == 0x140u);
  CHECK(e.taken);
  CHECK(s.r[kLinkRegister] == 0x104u);
  s.pc = 0x200;
  s.flags.az = false;
  e = execute(ins::branch(Cond::EQ, -0x10), 2, s, port);
  CHECK_FALSE(e.taken);
  CHECK(e.next_pc == 0x202u);
  e = execute(ins::trap(5), 2, s, port);
  CHECK(e.kind == EffectKind::Trap);
  CHECK(e.code == 5u);
}

TEST_CASE("MOVT keeps the low half") {
  NullPort port;
  ArchState s;
  execute(ins::movi(1, 0x5678), 4, s, port);
  execute(ins::movt(1, 0x1234), 4, s, port);
  CHECK(s.r[1] == 0x12345678u);
}

TEST_CASE("memory faults surface as an effect") {
  NullPort port;
  ArchState s;
  const Effect e = execute(ins::mem(Op::LDR, 1, 2, Width::B32, AddrMode::Displacement, 0), 2, s, port);
  CHECK(e.kind == EffectKind::MemoryFault);
}

}
