#include "doctest.h"

#include "episim/assembler.hpp"
#include "episim/harness.hpp"
#include "episim/kernels.hpp"
#include "episim/platform.hpp"

#include <sstream>

using namespace epi;

namespace {

const NodeAddress kFirst{32, 8};

PlatformConfig one_core() { return PlatformConfig::single_chip("one", kFirst, 1, 1); }

std::uint32_t local(NodeAddress n, std::uint32_t off) { return encode_address(n, off); }

// Per-unit cycles of a generated body, from the difference of two lengths.
template <class Gen> double per_unit(Gen gen) {
  const auto cfg = one_core();
  return double(timed_kernel(cfg, gen(128)) - timed_kernel(cfg, gen(64))) / 64.0;
}

std::string timed(const std::string& body, unsigned repeat) {
  std::ostringstream o;
  o << "  MOVFS R60, CYCLES\n";
  for (unsigned k = 0; k < repeat; ++k)
    o << body;
  o << "  MOVFS R61, CYCLES\n  SUB R61, R61, R60\n  MOV R62, #0x7000\n  STR R61, [R62]\n  TRAP #0\n";
  return o.str();
}

std::uint64_t count_events(const Simulation& sim, const std::string& what) {
  std::uint64_t n = 0;
  for (const auto& e : sim.events())
    n += e.what == what;
  return n;
}

} // namespace

TEST_SUITE("ecore") {

TEST_CASE("dual-issue pairing rules") {
  CHECK(issue_pair_allowed(ins::r3(Op::FMADD, 0, 4, 5), ins::ri(Op::ADD, 6, 6, 1)));
  CHECK(issue_pair_allowed(ins::ri(Op::ADD, 6, 6, 1), ins::r3(Op::FMUL, 0, 4, 5)));
  CHECK(issue_pair_allowed(ins::bare(Op::NOP), ins::ri(Op::ADD, 1, 1, 1)));
  CHECK(issue_pair_allowed(ins::r3(Op::FADD, 0, 1, 2),
                           ins::mem(Op::LDR, 3, 4, Width::B32, AddrMode::Displacement, 0)));
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::ADD, 1, 2, 3), ins::r3(Op::SUB, 4, 5, 6)));
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::r3(Op::FMUL, 4, 5, 6)));
  // Read after write inside the pair.
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::ri(Op::ADD, 4, 1, 1)));
  // Write after write.
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::ri(Op::ADD, 1, 4, 1)));
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::branch(Cond::AL, 8)));
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::testset(4, 5, 6)));
  CHECK_FALSE(issue_pair_allowed(ins::r3(Op::FADD, 1, 2, 3), ins::bare(Op::IDLE)));
}

TEST_CASE("result latencies") {
  CHECK(result_latency(ins::r3(Op::FADD, 1, 2, 3), RoundingMode::NearestEven) == 4);
  CHECK(result_latency(ins::r3(Op::FADD, 1, 2, 3), RoundingMode::Truncate) == 3);
  CHECK(result_latency(ins::mem(Op::LDR, 1, 2, Width::B32, AddrMode::Displacement, 0),
                       RoundingMode::NearestEven) == 2);
  CHECK(result_latency(ins::r3(Op::ADD, 1, 2, 3), RoundingMode::NearestEven) == 1);
}

TEST_CASE("NOP with ADD issues two per cycle") {
  const double c = per_unit([](unsigned n) { return timed("  ADD R1, R1, #1\n  NOP\n", n); });
  CHECK(c == doctest::Approx(1.0));
  const double single = per_unit([](unsigned n) { return timed("  ADD R1, R1, #1\n  ADD R2, R2, #1\n", n); });
  CHECK(single == doctest::Approx(2.0));
}

TEST_CASE("FMADD with ADD sustains two flops per cycle") {
  const double c = per_unit([](unsigned n) { return kernels::fmadd_stream(n); });
  CHECK(c == doctest::Approx(1.0));
}

TEST_CASE("branch, load and FPU timing") {
  const auto p = measure_pipeline(one_core());
  CHECK(p.taken_branch_penalty == doctest::Approx(3.0));
  CHECK(p.load_use_stall == doctest::Approx(1.0));
  CHECK(p.fpu_latency_rne == doctest::Approx(4.0));
  CHECK(p.fpu_latency_truncate == doctest::Approx(3.0));
  CHECK(p.fmadd_ipc >= 1.9);
}

TEST_CASE("TRAP halts with its code") {
  Simulation sim(one_core());
  sim.load(kFirst, assemble("  MOV R0, #1\n  TRAP #7\n"));
  sim.start(kFirst);
  const RunReport r = sim.run(RunUntil::all_halted(1000));
  CHECK(r.stop == "all_halted");
  CHECK(sim.core(kFirst).halt_reason() == HaltReason::Trap);
  CHECK(sim.core(kFirst).trap_code() == 7u);
}

TEST_CASE("lower slot wins when two interrupts are pending") {
  Simulation sim(one_core());
  sim.load(kFirst, assemble(".org 0\n  B start\n"
                            ".org 0x0c\n  TRAP #3\n"
                            ".org 0x14\n  TRAP #5\n"
                            ".org 0x40\n.entry start\nstart:\n"
                            "  MOV R0, #0\n  MOVTS IMASK, R0\nspin:\n  B spin\n"));
  sim.start(kFirst);
  sim.run(RunUntil::for_cycles(20));
  sim.raise_interrupt(kFirst, Interrupt::Dma0);
  sim.raise_interrupt(kFirst, Interrupt::Timer0);
  sim.run(RunUntil::all_halted(1000));
  CHECK(sim.core(kFirst).trap_code() == 3u);
}

TEST_CASE("a masked interrupt stays latched until unmasked") {
  Simulation sim(one_core());
  sim.load(kFirst, assemble(".org 0\n  B start\n"
                            ".org 0x0c\n  TRAP #3\n"
                            ".org 0x40\n.entry start\nstart:\n"
                            "  MOV R1, #100\n"
                            "wait:\n  SUB R1, R1, #1\n  BNE wait\n"
                            "  MOV R0, #0\n  MOVTS IMASK, R0\n"
                            "spin:\n  B spin\n"));
  sim.start(kFirst);
  sim.run(RunUntil::for_cycles(5));
  sim.raise_interrupt(kFirst, Interrupt::Timer0);
  sim.run(RunUntil::for_cycles(50));
  CHECK(sim.core(kFirst).run_state() == RunState::Running);
  CHECK((sim.core(kFirst).state().ilat & (1u << 3)) != 0);
  CHECK(count_events(sim, "vector 3") == 0);
  sim.run(RunUntil::all_halted(2000));
  CHECK(sim.core(kFirst).trap_code() == 3u);
  CHECK(count_events(sim, "vector 3") == 1);
}

TEST_CASE("IDLE waits for the timer interrupt") {
  Simulation sim(one_core());
  sim.load(kFirst, assemble(".org 0\n  B start\n"
                            ".org 0x0c\n  RTI\n"
                            ".org 0x40\n.entry start\nstart:\n"
                            "  MOV R0, #0x3f6\n  MOVTS IMASK, R0\n"
                            "  MOV R0, #200\n  MOVTS CTIMER0, R0\n"
                            "  MOV R0, #0x10\n  MOVTS CONFIG, R0\n"
                            "  IDLE\n"
                            "  MOV R2, #1\n  TRAP #0\n"));
  sim.start(kFirst);
  sim.run(RunUntil::for_cycles(100));
  CHECK(sim.core(kFirst).run_state() == RunState::Idle);
  sim.run(RunUntil::all_halted(1000));
  const Core& c = sim.core(kFirst);
  CHECK(c.trap_code() == 0u);
  CHECK(c.state().r[2] == 1u);
  CHECK(c.stats().idle_cycles >= 180);
  CHECK(c.stats().idle_cycles <= 210);
  CHECK(count_events(sim, "vector 3") == 1);
}

TEST_CASE("four cores leave a WAND barrier on the same cycle") {
  const auto cfg = PlatformConfig::single_chip("quad", kFirst, 2, 2);
  Simulation sim(cfg);
  const unsigned rounds = 5;
  unsigned k = 0;
  for (NodeAddress n : cfg.cores())
    sim.load(n, assemble(kernels::wand_barrier(rounds, 10 + 37 * k++)));
  sim.start_all_loaded();
  sim.run(RunUntil::all_halted(100000));
  for (NodeAddress n : cfg.cores())
    REQUIRE(sim.core(n).trap_code() == 0u);
  for (unsigned r = 0; r < rounds; ++r) {
    const std::uint32_t ref = sim.read32(local(cfg.cores()[0], kernels::kResult + 4 * r));
    for (NodeAddress n : cfg.cores())
      CHECK(sim.read32(local(n, kernels::kResult + 4 * r)) == ref);
  }
}

TEST_CASE("misaligned load takes the memory-fault vector") {
  Simulation sim(one_core());
  sim.load(kFirst, assemble(".org 0\n  B start\n"
                            ".org 0x08\n  TRAP #2\n"
                            ".org 0x40\n.entry start\nstart:\n"
                            "  MOV R0, #0x3fa\n  MOVTS IMASK, R0\n"
                            "  MOV R1, #0x6001\n  LDR R2, [R1]\n  TRAP #0\n"));
  sim.start(kFirst);
  sim.run(RunUntil::all_halted(1000));
  CHECK(sim.core(kFirst).trap_code() == 2u);
}

}
