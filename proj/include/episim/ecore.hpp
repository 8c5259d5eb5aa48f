#pragma once

#include "episim/isa.hpp"
#include "episim/local_memory.hpp"
#include "episim/semantics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace epi {

// Dual-issue rule: one FPU instruction with one integer or load/store
// instruction (a NOP pairs with either), no RAW or WAW between them, within
// the register-file port budget. Control and special instructions never pair.
bool issue_pair_allowed(const Instruction& first, const Instruction& second);

inline constexpr unsigned kBranchPenalty = 3;

// Cycles until a written register may be read by a later instruction.
unsigned result_latency(const Instruction& i, RoundingMode rm);

enum class RunState : std::uint8_t { Stopped, Running, Idle, Halted };
enum class HaltReason : std::uint8_t { None, Trap, Breakpoint, MultiBreakpoint, Faulted, Host };
const char* to_string(RunState s);
const char* to_string(HaltReason r);

struct CoreStats {
  std::uint64_t active_cycles = 0; // running or idle
  std::uint64_t issue_cycles = 0;  // cycles with at least one instruction issued
  std::uint64_t instructions = 0;
  std::uint64_t dual_issues = 0;
  std::uint64_t flops = 0;
  std::uint64_t dependency_stalls = 0;
  std::uint64_t memory_stalls = 0;
  std::uint64_t fetch_stalls = 0;
  std::uint64_t remote_wait_cycles = 0;
  std::uint64_t penalty_cycles = 0;
  std::uint64_t idle_cycles = 0;
  std::uint64_t taken_branches = 0;
  std::uint64_t interrupts = 0;
};

// Something the platform needs to act on after a core cycle.
struct CoreEvent {
  enum Kind { None, Halted, Vectored, Sync, Wand, MultiBreakpoint } kind = None;
  unsigned slot = 0;
};

class Core {
public:
  Core(NodeAddress id, std::uint32_t mem_bytes);

  NodeAddress id() const { return id_; }
  ArchState& state() { return s_; }
  const ArchState& state() const { return s_; }
  RunState run_state() const { return run_; }
  HaltReason halt_reason() const { return halt_; }
  std::optional<std::uint32_t> trap_code() const { return trap_code_; }
  const CoreStats& stats() const { return stats_; }
  bool waiting_remote() const { return waiting_; }

  // Architectural reset: registers, special registers and pipeline cleared,
  // PC 0, stopped.
  void reset();
  void start(std::uint32_t entry);
  void halt(HaltReason why);

  // Latches an interrupt in ILAT.
  void raise(Interrupt slot);
  // Highest-priority interrupt that would be taken now, if any.
  std::optional<unsigned> serviceable() const;

  // One clock. Bank claims for load/store and fetch go through `banks`;
  // `port` performs the data accesses.
  CoreEvent cycle(std::uint64_t now, const Scratchpad& mem, BankClaims& banks, DataPort& port);

  // Delivery of the value for an outstanding remote load or TESTSET.
  void complete_remote(std::uint64_t value, std::uint64_t now);

private:
  struct FetchBuffer {
    std::array<std::uint32_t, 2> line{};
    unsigned count = 0;

    bool holds(std::uint32_t addr, unsigned len) const;
    void retire_below(std::uint32_t pc);
    void flush() { count = 0; }
  };

  bool regs_ready(const Instruction& i, std::uint64_t now) const;
  void record_issue(const Instruction& i, std::uint64_t now);
  void redirect(std::uint32_t target);
  bool try_vector();
  void fetch(const Scratchpad& mem, BankClaims& banks);

  NodeAddress id_;
  std::uint32_t mem_bytes_;
  ArchState s_;
  RunState run_ = RunState::Stopped;
  HaltReason halt_ = HaltReason::None;
  std::optional<std::uint32_t> trap_code_;
  std::array<std::uint64_t, 64> ready_{};
  std::uint64_t fpu_flags_ready_ = 0;
  unsigned penalty_ = 0;
  FetchBuffer fetch_;
  bool waiting_ = false;
  std::uint64_t resume_at_ = 0;
  Instruction pending_load_;
  CoreStats stats_;
};

} // namespace epi
