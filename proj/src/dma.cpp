#include "episim/dma.hpp"

#include "episim/emesh.hpp"
#include "episim/error.hpp"
#include "episim/local_memory.hpp"

namespace epi {

const char* to_string(DmaState s) {
  switch (s) {
  case DmaState::Idle: return "idle";
  case DmaState::Active: return "active";
  case DmaState::Done: return "done";
  case DmaState::Error: return "error";
  }
  return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidDescriptor, why); }

// Region of one endpoint over the whole strided range.
Region endpoint(std::uint32_t first, std::int32_t stride, std::uint32_t count, Width w,
                const PlatformConfig& config, NodeAddress self, const char* what) {
  const std::int64_t span = std::int64_t(stride) * (std::int64_t(count) - 1);
  const std::int64_t last = std::int64_t(first) + span;
  if (last < 0 || last > 0xffffffffll) invalid(std::string(what) + " range wraps");
  const Region a = classify(first, config, self);
  const Region b = classify(std::uint32_t(last), config, self);
  if (a.kind == RegionKind::Unmapped || b.kind == RegionKind::Unmapped)
    invalid(std::string(what) + " unmapped");
  if (a.out_of_bounds || b.out_of_bounds)
    invalid(std::string(what) + " out of bounds");
  const auto an = decode_address(first).node, bn = decode_address(std::uint32_t(last)).node;
  if (an != bn) invalid(std::string(what) + " crosses a node boundary");
  const std::uint64_t end = decode_address(std::uint32_t(std::max<std::int64_t>(first, last))).offset +
                            bytes_of(w);
  if (a.kind == RegionKind::LocalCore && end > config.core_mem_bytes)
    invalid(std::string(what) + " out of bounds");
  return a;
}

} // namespace

bool DmaChannel::start(const DmaDescriptor& d, const PlatformConfig& config, NodeAddress self) {
  if (busy()) throw Error(ErrorCode::ChannelBusy, "DMA channel " + std::to_string(id_) + " busy");
  const unsigned size = bytes_of(d.width);
  const std::uint32_t src = resolve_local_alias(d.src, self);
  const std::uint32_t dst = resolve_local_alias(d.dst, self);
  if (src % size || dst % size) invalid("misaligned endpoint");
  if (d.src_stride % std::int32_t(size) || d.dst_stride % std::int32_t(size))
    invalid("stride not a multiple of the element width");
  Mode mode = Mode::Push;
  if (d.count > 0) {
    const Region rs = endpoint(src, d.src_stride, d.count, d.width, config, self, "source");
    const Region rd = endpoint(dst, d.dst_stride, d.count, d.width, config, self, "destination");
    if (rs.kind == RegionKind::LocalCore)
      mode = Mode::Push;
    else if (rd.kind == RegionKind::LocalCore)
      mode = Mode::Pull;
    else
      invalid("remote to remote transfers are not supported");
  }
  desc_ = d;
  desc_.src = src;
  desc_.dst = dst;
  mode_ = mode;
  issued_ = 0;
  src_cur_ = src;
  dst_cur_ = dst;
  if (d.count == 0) {
    state_ = DmaState::Done;
    return true;
  }
  state_ = DmaState::Active;
  return false;
}

DmaEvent DmaChannel::cycle(DmaContext& ctx) {
  if (state_ != DmaState::Active) return DmaEvent::None;
  Packet p;
  p.src = ctx.self;
  p.width = desc_.width;
  if (mode_ == Mode::Push) {
    p.kind = PacketKind::Write;
    p.dest = dst_cur_;
  } else {
    p.kind = PacketKind::ReadRequest;
    p.dest = src_cur_;
    p.reply_to = dst_cur_;
    p.sink = ReplySink::Memory;
  }
  const auto mesh = select_mesh(p.kind, p.dest, ctx.self, ctx.config);
  if (!mesh) {
    state_ = DmaState::Error;
    return DmaEvent::Faulted;
  }
  p.mesh = *mesh;
  if (!ctx.mesh.can_inject(ctx.self, p.mesh)) return DmaEvent::None;
  if (mode_ == Mode::Push) {
    const std::uint32_t off = decode_address(src_cur_).offset;
    if (!ctx.memory.valid(off, desc_.width)) {
      state_ = DmaState::Error;
      return DmaEvent::Faulted;
    }
    if (!ctx.banks.claim(off)) return DmaEvent::None;
    p.data = ctx.memory.read(off, desc_.width);
  }
  ctx.mesh.inject(ctx.self, p, ctx.cycle);
  ++issued_;
  src_cur_ += std::uint32_t(desc_.src_stride);
  dst_cur_ += std::uint32_t(desc_.dst_stride);
  if (issued_ == desc_.count) {
    state_ = DmaState::Done;
    return DmaEvent::Completed;
  }
  return DmaEvent::Progress;
}

void DmaChannel::reset() { *this = DmaChannel(id_); }

std::uint32_t DmaChannel::read_reg(unsigned field) const {
  switch (field) {
  case sreg::DMA_SRC: return reg_src_;
  case sreg::DMA_DST: return reg_dst_;
  case sreg::DMA_COUNT: return busy() ? remaining() : reg_count_;
  case sreg::DMA_STRIDE: return reg_stride_;
  case sreg::DMA_CONFIG: return reg_config_;
  case sreg::DMA_STATUS: return std::uint32_t(state_);
  default: return 0;
  }
}

bool DmaChannel::write_reg(unsigned field, std::uint32_t value, const PlatformConfig& config,
                           NodeAddress self) {
  switch (field) {
  case sreg::DMA_SRC: reg_src_ = value; break;
  case sreg::DMA_DST: reg_dst_ = value; break;
  case sreg::DMA_COUNT: reg_count_ = value; break;
  case sreg::DMA_STRIDE: reg_stride_ = value; break;
  case sreg::DMA_CONFIG: {
    reg_config_ = value & ~kStartBit;
    if (!(value & kStartBit)) break;
    DmaDescriptor d;
    d.src = reg_src_;
    d.dst = reg_dst_;
    d.count = reg_count_;
    d.width = Width(value & 3);
    d.src_stride = std::int16_t(reg_stride_ & 0xffff);
    d.dst_stride = std::int16_t(reg_stride_ >> 16);
    try {
      return start(d, config, self);
    } catch (const Error&) {
      if (!busy()) state_ = DmaState::Error;
    }
    break;
  }
  default: break;
  }
  return false;
}

} // namespace epi
