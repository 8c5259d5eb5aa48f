#pragma once

#include "episim/address_map.hpp"
#include "episim/config.hpp"
#include "episim/isa.hpp"

#include <cstdint>

namespace epi {

class BankClaims;
class Mesh;
class Scratchpad;

// 1D strided transfer. Addresses may use the local alias.
struct DmaDescriptor {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t count = 0;
  Width width = Width::B64;
  std::int32_t src_stride = 8;
  std::int32_t dst_stride = 8;

  friend bool operator==(const DmaDescriptor&, const DmaDescriptor&) = default;
};

enum class DmaState : std::uint8_t { Idle, Active, Done, Error };
const char* to_string(DmaState s);

struct DmaContext {
  NodeAddress self;
  const PlatformConfig& config;
  Scratchpad& memory;
  BankClaims& banks;
  Mesh& mesh;
  std::uint64_t cycle;
};

enum class DmaEvent { None, Progress, Completed, Faulted };

class DmaChannel {
public:
  explicit DmaChannel(unsigned id = 0) : id_(id) {}

  unsigned id() const { return id_; }
  DmaState state() const { return state_; }
  bool busy() const { return state_ == DmaState::Active; }
  const DmaDescriptor& descriptor() const { return desc_; }
  std::uint32_t remaining() const { return desc_.count - issued_; }

  // Throws Error(ChannelBusy | InvalidDescriptor); the channel is unchanged
  // on error. Returns true when the transfer completed immediately (count 0).
  bool start(const DmaDescriptor& d, const PlatformConfig& config, NodeAddress self);
  // Moves at most one element. Completed is returned on the cycle the last
  // element is injected.
  DmaEvent cycle(DmaContext& ctx);
  void reset();

  // Register view for MOVFS / MOVTS. Writing CONFIG with bit 31 set starts the
  // channel from the staged registers; failures show up as state Error.
  std::uint32_t read_reg(unsigned field) const;
  // Returns true when a start completed immediately.
  bool write_reg(unsigned field, std::uint32_t value, const PlatformConfig& config,
                 NodeAddress self);

  static constexpr std::uint32_t kStartBit = 1u << 31;

private:
  enum class Mode : std::uint8_t { Push, Pull };

  unsigned id_;
  DmaState state_ = DmaState::Idle;
  DmaDescriptor desc_;
  Mode mode_ = Mode::Push;
  std::uint32_t issued_ = 0;
  std::uint32_t src_cur_ = 0, dst_cur_ = 0;
  // Staged register values.
  std::uint32_t reg_src_ = 0, reg_dst_ = 0, reg_count_ = 0, reg_stride_ = 0, reg_config_ = 0;
};

} // namespace epi
