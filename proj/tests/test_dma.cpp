#include "doctest.h"

#include "episim/assembler.hpp"
#include "episim/error.hpp"
#include "episim/platform.hpp"

#include <string>

using namespace epi;

namespace {

const NodeAddress A{32, 8}, B{32, 9}, C{33, 10};

std::uint32_t at(NodeAddress n, std::uint32_t off) { return encode_address(n, off); }

void fill(Simulation& sim, NodeAddress n, std::uint32_t off, unsigned words) {
  for (unsigned k = 0; k < words; ++k)
    sim.write32(at(n, off + 4 * k), 0xA5000000u + k * 0x01010101u);
}

void run_until_idle(Simulation& sim, std::uint64_t cap = 100000) {
  sim.run(RunUntil::when([](const Simulation& s) { return s.quiescent(); }, cap));
}

unsigned count(const Simulation& sim, const std::string& what) {
  unsigned n = 0;
  for (const auto& e : sim.events())
    n += e.what == what;
  return n;
}

} // namespace

TEST_SUITE("dma") {

TEST_CASE("eight elements become eight packets and one completion") {
  Simulation sim(PlatformConfig::preset("e16"));
  fill(sim, A, 0x1000, 16);
  unsigned writes = 0;
  sim.set_trace([&](const TraceRecord& r) {
    if (std::string(r.event) == "inject" && r.kind == PacketKind::Write) ++writes;
  });
  sim.start_dma(A, 0, {0x1000, at(B, 0x2000), 8, Width::B64, 8, 8});
  CHECK(sim.dma(A, 0).busy());
  run_until_idle(sim);
  CHECK(writes == 8);
  CHECK(sim.dma(A, 0).state() == DmaState::Done);
  CHECK(count(sim, "dma0 done") == 1);
  CHECK((sim.core(A).state().ilat & (1u << unsigned(Interrupt::Dma0))) != 0);
  CHECK(sim.read(at(B, 0x2000), 64) == sim.read(at(A, 0x1000), 64));
}

TEST_CASE("a zero-length transfer completes at once") {
  Simulation sim(PlatformConfig::preset("e16"));
  sim.start_dma(A, 1, {0x1000, at(B, 0x2000), 0, Width::B64, 8, 8});
  CHECK(sim.dma(A, 1).state() == DmaState::Done);
  CHECK((sim.core(A).state().ilat & (1u << unsigned(Interrupt::Dma1))) != 0);
}

TEST_CASE("bad descriptors are rejected and leave the channel idle") {
  Simulation sim(PlatformConfig::preset("e16"));
  auto code = [&](const DmaDescriptor& d) {
    try {
      sim.start_dma(A, 0, d);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Usage;
  };
  CHECK(code({0x1000, encode_address({50, 50}, 0), 4, Width::B64, 8, 8}) == ErrorCode::InvalidDescriptor);
  CHECK(sim.dma(A, 0).state() == DmaState::Idle);
  CHECK(code({0x1004, at(B, 0), 4, Width::B64, 8, 8}) == ErrorCode::InvalidDescriptor);
  CHECK(code({0x1000, at(B, 0), 4, Width::B64, 4, 8}) == ErrorCode::InvalidDescriptor);
  CHECK(code({0x7ff8, at(B, 0), 4, Width::B64, 8, 8}) == ErrorCode::InvalidDescriptor);
  CHECK(sim.dma(A, 0).state() == DmaState::Idle);

  sim.start_dma(A, 0, {0x1000, at(B, 0), 64, Width::B64, 8, 8});
  CHECK(code({0x1000, at(B, 0), 4, Width::B64, 8, 8}) == ErrorCode::ChannelBusy);
}

TEST_CASE("contiguous copy in every width") {
  for (Width w : {Width::B8, Width::B16, Width::B32, Width::B64}) {
    Simulation sim(PlatformConfig::preset("e16"));
    fill(sim, A, 0x1000, 64);
    const unsigned size = bytes_of(w);
    const std::uint32_t n = 256 / size;
    sim.start_dma(A, 0, {at(A, 0x1000), at(C, 0x3000), n, w, std::int32_t(size), std::int32_t(size)});
    run_until_idle(sim);
    CHECK(sim.read(at(C, 0x3000), 256) == sim.read(at(A, 0x1000), 256));
  }
}

TEST_CASE("a pull from a remote node copies into local memory") {
  Simulation sim(PlatformConfig::preset("e16"));
  fill(sim, C, 0x1000, 32);
  sim.start_dma(A, 1, {at(C, 0x1000), 0x2000, 16, Width::B64, 8, 8});
  run_until_idle(sim);
  CHECK(sim.read(at(A, 0x2000), 128) == sim.read(at(C, 0x1000), 128));
  CHECK(count(sim, "dma1 done") == 1);
}

TEST_CASE("negative and gathered strides match an element-by-element model") {
  Simulation sim(PlatformConfig::preset("e16"));
  fill(sim, A, 0x1000, 256);
  const std::uint32_t n = 20;
  const std::int32_t ss = -12, ds = 8;
  const std::uint32_t src = 0x1000 + 4 * 200, dst = 0x4000;
  sim.start_dma(A, 0, {src, at(B, dst), n, Width::B32, ss, ds});
  run_until_idle(sim);
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t from = std::uint32_t(std::int64_t(src) + std::int64_t(ss) * k);
    const std::uint32_t to = dst + std::uint32_t(ds) * k;
    CHECK(sim.read32(at(B, to)) == sim.read32(at(A, from)));
    CHECK(sim.read32(at(B, to + 4)) == 0u);
  }
}

TEST_CASE("two channels share the injection port") {
  Simulation sim(PlatformConfig::preset("e16"));
  fill(sim, A, 0x1000, 1024);
  const std::uint32_t n = 256;
  sim.start_dma(A, 0, {0x1000, at(B, 0x1000), n, Width::B64, 8, 8});
  sim.start_dma(A, 1, {0x1800, at(C, 0x1800), n, Width::B64, 8, 8});
  const RunReport r = sim.run(RunUntil::when([](const Simulation& s) { return s.quiescent(); }, 100000));
  CHECK(r.cycles >= 2 * n);
  CHECK(count(sim, "dma0 done") == 1);
  CHECK(count(sim, "dma1 done") == 1);
  CHECK(sim.read(at(B, 0x1000), 8 * n) == sim.read(at(A, 0x1000), 8 * n));
  CHECK(sim.read(at(C, 0x1800), 8 * n) == sim.read(at(A, 0x1800), 8 * n));
}

TEST_CASE("a core starts a transfer through its DMA registers") {
  Simulation sim(PlatformConfig::preset("e16"));
  fill(sim, A, 0x1000, 8);
  const std::uint32_t dst = at(B, 0x2000);
  sim.load(A, assemble("  MOV R0, #0x1000\n  MOVTS DMA0_SRC, R0\n"
                       "  MOV R0, #%low(" + std::to_string(dst) + ")\n"
                       "  MOVT R0, #%high(" + std::to_string(dst) + ")\n  MOVTS DMA0_DST, R0\n"
                       "  MOV R0, #4\n  MOVTS DMA0_COUNT, R0\n"
                       "  MOV R0, #8\n  MOVT R0, #8\n  MOVTS DMA0_STRIDE, R0\n"
                       "  MOV R0, #3\n  MOVT R0, #0x8000\n  MOVTS DMA0_CONFIG, R0\n"
                       "wait:\n  MOVFS R1, DMA0_STATUS\n  SUB R1, R1, #1\n  BEQ wait\n"
                       "  TRAP #0\n"));
  sim.start(A);
  sim.run(RunUntil::all_halted(10000));
  run_until_idle(sim);
  CHECK(sim.core(A).trap_code() == 0u);
  CHECK(sim.read(dst, 32) == sim.read(at(A, 0x1000), 32));
}

}
