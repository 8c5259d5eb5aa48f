#include "episim/address_map.hpp"

#include "episim/config.hpp"
#include "episim/error.hpp"

#include <cstdio>
#include <regex>

namespace epi {

const char* to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::UndefinedLabel: return "UndefinedLabel";
  case ErrorCode::BranchOutOfRange: return "BranchOutOfRange";
  case ErrorCode::ImmediateOutOfRange: return "ImmediateOutOfRange";
  case ErrorCode::IllegalOpcode: return "IllegalOpcode";
  case ErrorCode::MemoryFault: return "MemoryFault";
  case ErrorCode::ChannelBusy: return "ChannelBusy";
  case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
  case ErrorCode::ImageTooLarge: return "ImageTooLarge";
  case ErrorCode::NoSuchCore: return "NoSuchCore";
  case ErrorCode::NotLoaded: return "NotLoaded";
  case ErrorCode::Unmapped: return "Unmapped";
  case ErrorCode::BadImage: return "BadImage";
  case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

std::string to_string(NodeAddress n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "(%u,%u)", unsigned(n.row), unsigned(n.col));
  return buf;
}

std::optional<NodeAddress> parse_node(const std::string& text) {
  static const std::regex re(R"(\s*\(?\s*(\d+)\s*,\s*(\d+)\s*\)?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    return std::nullopt;
  const unsigned long row = std::stoul(m[1]);
  const unsigned long col = std::stoul(m[2]);
  if (row >= kMeshDim || col >= kMeshDim)
    return std::nullopt;
  return NodeAddress{static_cast<std::uint8_t>(row), static_cast<std::uint8_t>(col)};
}

std::uint32_t encode_address(NodeAddress node, std::uint32_t offset) {
  if (offset >= kNodeSpan)
    throw Error(ErrorCode::OffsetOutOfRange, "offset " + std::to_string(offset) + " exceeds 20 bits");
  return node_base(node) | offset;
}

const char* to_string(RegionKind k) {
  switch (k) {
  case RegionKind::LocalCore: return "LocalCore";
  case RegionKind::RemoteCore: return "RemoteCore";
  case RegionKind::OffChipWindow: return "OffChipWindow";
  case RegionKind::Unmapped: return "Unmapped";
  }
  return "?";
}

Region classify(std::uint32_t raw, const PlatformConfig& config, NodeAddress self) {
  const GlobalAddress a = decode_address(raw);
  Region r;
  if (config.is_core(a.node)) {
    r.kind = a.node == self ? RegionKind::LocalCore : RegionKind::RemoteCore;
    r.out_of_bounds = a.offset >= config.core_mem_bytes;
    return r;
  }
  if (auto w = config.window_of(a.node)) {
    r.kind = RegionKind::OffChipWindow;
    r.window_id = *w;
    r.out_of_bounds = config.windows[*w].byte_offset(raw) >= config.windows[*w].size;
    return r;
  }
  return r;
}

} // namespace epi
