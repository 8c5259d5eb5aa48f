#pragma once

#include "episim/address_map.hpp"
#include "episim/fpu.hpp"
#include "episim/isa.hpp"

#include <array>
#include <cstdint>

namespace epi {

struct Flags {
  bool an = false, az = false, av = false, ac = false;
  bool bn = false, bz = false;
  // Sticky floating-point conditions.
  bool invalid = false, overflow = false, underflow = false;

  friend bool operator==(const Flags&, const Flags&) = default;
};

bool eval_condition(Cond c, const Flags& f);

inline constexpr unsigned kInterruptSlots = 10;

enum class Interrupt : unsigned {
  SyncReset = 0,
  SoftwareException = 1,
  MemoryFault = 2,
  Timer0 = 3,
  Timer1 = 4,
  Dma0 = 5,
  Dma1 = 6,
  Wand = 7,
  User = 8,
  Reserved = 9,
};

constexpr std::uint32_t ivt_entry(Interrupt slot) { return unsigned(slot) * 4; }

// CONFIG register bits.
namespace config_bits {
inline constexpr std::uint32_t kTruncate = 1u << 0;
inline constexpr std::uint32_t kTimer0Enable = 1u << 4;
inline constexpr std::uint32_t kTimer1Enable = 1u << 5;
inline constexpr std::uint32_t kMulticastStores = 1u << 8;
} // namespace config_bits

// Architectural state of one eCore.
struct ArchState {
  std::array<std::uint32_t, 64> r{};
  Flags flags;
  std::uint32_t pc = 0;
  std::uint32_t config = 0;
  bool gid = false; // global interrupt disable
  std::uint32_t imask = 0;
  std::uint32_t ilat = 0;
  std::uint32_t ipend = 0;
  std::uint32_t iret = 0;
  std::array<std::uint32_t, 2> ctimer{};
  std::uint32_t multicast = 0;
  NodeAddress coreid;

  RoundingMode rounding() const {
    return (config & config_bits::kTruncate) ? RoundingMode::Truncate : RoundingMode::NearestEven;
  }
  std::uint32_t status() const;
  void set_status(std::uint32_t v);

  friend bool operator==(const ArchState&, const ArchState&) = default;
};

enum class Access { Ok, Stall, Pending, Fault };

struct LoadResult {
  Access status = Access::Ok;
  std::uint64_t value = 0;
};

// Memory and device side of instruction execution. Addresses are the raw
// 32-bit values computed by the instruction (local aliases included).
class DataPort {
public:
  virtual ~DataPort() = default;
  // Pending: the value arrives later and the caller completes the load.
  virtual LoadResult load(std::uint32_t addr, Width w) = 0;
  virtual Access store(std::uint32_t addr, Width w, std::uint64_t value) = 0;
  virtual LoadResult testset(std::uint32_t addr, std::uint32_t value) = 0;
  // DMA registers and CYCLES.
  virtual std::uint32_t read_device(unsigned sreg) = 0;
  virtual void write_device(unsigned sreg, std::uint32_t value) = 0;
};

enum class EffectKind {
  None,
  Stall,      // instruction did not execute; retry next cycle
  Pending,    // remote load in flight; destination registers not yet valid
  Trap,
  Breakpoint,
  MultiBreakpoint,
  Idle,
  Sync,
  Wand,
  SoftwareException,
  MemoryFault,
};

struct Effect {
  EffectKind kind = EffectKind::None;
  std::uint32_t next_pc = 0;
  bool taken = false; // control transfer costing the branch penalty
  std::uint32_t code = 0; // trap code
};

// Executes one instruction against `s`. PC-relative targets use s.pc as the
// instruction address and `length_bytes` as its size.
Effect execute(const Instruction& i, unsigned length_bytes, ArchState& s, DataPort& port);

// Writes a completed remote load into its destination register(s).
void complete_load(ArchState& s, const Instruction& load, std::uint64_t value);

// Integer ALU helpers shared with the timing model and tests.
std::uint32_t bit_reverse(std::uint32_t v);

} // namespace epi
