#include "episim/kernels.hpp"

#include <cstdio>
#include <sstream>

namespace epi::kernels {
namespace {

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void load32(std::ostream& o, unsigned reg, std::uint32_t v) {
  o << "  MOV R" << reg << ", #%low(" << hex(v) << ")\n";
  if (v >> 16)
    o << "  MOVT R" << reg << ", #%high(" << hex(v) << ")\n";
}

void begin_timing(std::ostream& o) { o << "  MOVFS R60, CYCLES\n"; }

void end_timing(std::ostream& o) {
  o << "  MOVFS R61, CYCLES\n"
       "  SUB R61, R61, R60\n";
  load32(o, 62, kResult);
  o << "  STR R61, [R62]\n"
       "  TRAP #0\n";
}

void nops(std::ostream& o, unsigned n) {
  for (unsigned i = 0; i < n; ++i)
    o << "  NOP\n";
}

} // namespace

std::string fmadd_stream(unsigned pairs) {
  std::ostringstream o;
  o << "; unrolled FMADD stream, 2 flops per pair\n";
  begin_timing(o);
  for (unsigned k = 0; k < pairs; ++k)
    o << "  FMADD R" << k % 4 << ", R4, R5\n  ADD R6, R6, #1\n";
  end_timing(o);
  return o.str();
}

std::string fmadd_loop(unsigned iterations, unsigned pairs, bool taken) {
  std::ostringstream o;
  load32(o, 7, iterations + 1);
  begin_timing(o);
  auto body = [&] {
    for (unsigned k = 0; k < pairs; ++k)
      o << "  FMADD R" << k % 4 << ", R4, R5\n  ADD R6, R6, #1\n";
    o << "  SUB R7, R7, #1\n";
  };
  if (taken) {
    o << "  SUB R7, R7, #1\n";
    o << "loop:\n";
    body();
    o << "  BNE loop\n";
  } else {
    for (unsigned i = 0; i < iterations; ++i) {
      body();
      o << "  BEQ never\n";
    }
  }
  end_timing(o);
  o << "never:\n  TRAP #1\n";
  return o.str();
}

std::string branch_loop(unsigned iterations, bool taken) {
  std::ostringstream o;
  if (taken) {
    load32(o, 0, iterations);
    begin_timing(o);
    o << "loop:\n  SUB R0, R0, #1\n  BNE loop\n";
  } else {
    load32(o, 0, iterations + 1);
    begin_timing(o);
    for (unsigned i = 0; i < iterations; ++i)
      o << "  SUB R0, R0, #1\n  BEQ never\n";
  }
  end_timing(o);
  o << "never:\n  TRAP #1\n";
  return o.str();
}

std::string load_use(unsigned count, bool dependent) {
  std::ostringstream o;
  load32(o, 0, kData);
  begin_timing(o);
  for (unsigned i = 0; i < count; ++i)
    o << "  LDR R1, [R0]\n" << (dependent ? "  ADD R2, R1, R1\n" : "  ADD R2, R3, R3\n");
  end_timing(o);
  return o.str();
}

std::string fpu_chain(unsigned count, bool truncate) {
  std::ostringstream o;
  if (truncate)
    o << "  MOV R3, #1\n  MOVTS CONFIG, R3\n";
  begin_timing(o);
  for (unsigned i = 0; i < count; ++i)
    o << "  FADD R1, R1, R2\n";
  end_timing(o);
  return o.str();
}

std::string remote_stream(std::uint32_t target, unsigned count, bool reads) {
  std::ostringstream o;
  load32(o, 0, target);
  begin_timing(o);
  for (unsigned i = 0; i < count; ++i)
    o << (reads ? "  LDR R1, [R0, #" : "  STR R1, [R0, #") << (i % 128) * 4 << "]\n";
  end_timing(o);
  return o.str();
}

std::string testset_mutex(std::uint32_t lock, unsigned rounds, unsigned pad) {
  std::ostringstream o;
  o << "; TESTSET spin lock around a shared round counter\n";
  load32(o, 0, lock);
  o << "  MOV R1, #0\n"
       "  MOVFS R2, COREID\n"
       "  MOV R7, #0\n";
  load32(o, 8, rounds);
  nops(o, pad);
  o << "acquire:\n"
       "  MOV R3, R2\n"
       "  TESTSET R3, [R0, R1]\n"
       "  SUB R3, R3, #0\n"
       "  BNE acquire\n"
       "  LDR R4, [R0, #4]\n"
       "  SUB R5, R4, R8\n"
       "  BGTEU finish\n"
       "  LSL R5, R4, #2\n"
       "  ADD R5, R5, R0\n"
       "  STR R2, [R5, #256]\n"
       "  ADD R4, R4, #1\n"
       "  STR R4, [R0, #4]\n"
       "  ADD R7, R7, #1\n"
       "  MOV R6, #0\n"
       "  STR R6, [R0]\n"
       "  B acquire\n"
       "finish:\n"
       "  MOV R6, #0\n"
       "  STR R6, [R0]\n";
  load32(o, 9, kResult);
  o << "  STR R7, [R9]\n"
       "  TRAP #0\n";
  return o.str();
}

std::string wand_barrier(unsigned rounds, unsigned work) {
  std::ostringstream o;
  o << ".org 0\n"
       "  B start\n"
       ".org 0x1c\n"
       "  RTI\n"
       ".org 0x40\n"
       ".entry start\n"
       "start:\n"
       "  MOV R0, #0x37e\n"
       "  MOVTS IMASK, R0\n";
  load32(o, 5, rounds);
  load32(o, 9, kResult);
  o << "round:\n";
  load32(o, 1, work);
  o << "delay:\n"
       "  SUB R1, R1, #1\n"
       "  BNE delay\n"
       "  WAND\n"
       "  IDLE\n"
       "  MOVFS R2, CYCLES\n"
       "  STR R2, [R9], #4\n"
       "  SUB R5, R5, #1\n"
       "  BNE round\n"
       "  TRAP #0\n";
  return o.str();
}

std::string ping(std::uint32_t peer, unsigned rounds, bool initiator) {
  std::ostringstream o;
  load32(o, 0, peer);
  load32(o, 1, kData);
  o << "  MOV R2, #1\n";
  load32(o, 5, rounds);
  begin_timing(o);
  o << "loop:\n";
  if (initiator)
    o << "  STR R2, [R0]\n";
  o << "wait:\n"
       "  LDR R3, [R1]\n"
       "  SUB R3, R3, R2\n"
       "  BNE wait\n";
  if (!initiator)
    o << "  STR R2, [R0]\n";
  o << "  ADD R2, R2, #1\n"
       "  SUB R5, R5, #1\n"
       "  BNE loop\n";
  end_timing(o);
  return o.str();
}

std::string multicast_store(std::uint32_t dest, std::uint32_t value) {
  std::ostringstream o;
  o << "  MOV R2, #0x100\n"
       "  MOVTS CONFIG, R2\n";
  load32(o, 0, dest);
  load32(o, 1, value);
  o << "  STR R1, [R0]\n"
       "  TRAP #0\n";
  return o.str();
}

std::string two_writes(std::uint32_t first, std::uint32_t second, unsigned pad) {
  std::ostringstream o;
  load32(o, 0, first);
  load32(o, 1, second);
  o << "  MOV R2, #1\n  MOV R3, #2\n";
  nops(o, pad);
  o << "  STR R2, [R0]\n"
       "  STR R3, [R1]\n"
       "  TRAP #0\n";
  return o.str();
}

std::string mp_producer(std::uint32_t data, std::uint32_t flag, bool barrier, unsigned pad) {
  std::ostringstream o;
  load32(o, 0, data);
  load32(o, 1, flag);
  o << "  MOV R2, #42\n  MOV R3, #1\n";
  nops(o, pad);
  o << "  STR R2, [R0]\n";
  if (barrier)
    o << "visible:\n"
         "  LDR R4, [R0]\n"
         "  SUB R4, R4, R2\n"
         "  BNE visible\n";
  o << "  STR R3, [R1]\n"
       "  TRAP #0\n";
  return o.str();
}

std::string mp_consumer(std::uint32_t data, unsigned pad) {
  std::ostringstream o;
  load32(o, 0, kData);
  load32(o, 1, data);
  load32(o, 7, kResult);
  nops(o, pad);
  o << "poll:\n"
       "  LDR R4, [R0]\n"
       "  SUB R4, R4, #1\n"
       "  BNE poll\n"
       "  LDR R6, [R1]\n"
       "  STR R6, [R7]\n"
       "  TRAP #0\n";
  return o.str();
}

} // namespace epi::kernels
