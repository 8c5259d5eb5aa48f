#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace epi {

struct PlatformConfig;

inline constexpr unsigned kMeshDim = 64;
inline constexpr std::uint32_t kOffsetBits = 20;
inline constexpr std::uint32_t kNodeSpan = 1u << kOffsetBits;
inline constexpr unsigned kMaxNodes = kMeshDim * kMeshDim;

// Mesh coordinate. Row grows southwards, column grows eastwards.
struct NodeAddress {
  std::uint8_t row = 0;
  std::uint8_t col = 0;

  constexpr std::uint16_t id() const { return static_cast<std::uint16_t>((row << 6) | col); }
  static constexpr NodeAddress from_id(std::uint16_t id) {
    return {static_cast<std::uint8_t>((id >> 6) & 63), static_cast<std::uint8_t>(id & 63)};
  }

  friend constexpr bool operator==(NodeAddress, NodeAddress) = default;
  friend constexpr auto operator<=>(NodeAddress a, NodeAddress b) { return a.id() <=> b.id(); }
};

std::string to_string(NodeAddress n);
// Accepts "row,col" or "(row,col)".
std::optional<NodeAddress> parse_node(const std::string& text);

constexpr unsigned manhattan(NodeAddress a, NodeAddress b) {
  const int dr = int(a.row) - int(b.row);
  const int dc = int(a.col) - int(b.col);
  return unsigned((dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc));
}

struct GlobalAddress {
  std::uint32_t raw = 0;
  NodeAddress node;
  std::uint32_t offset = 0;

  friend constexpr bool operator==(const GlobalAddress&, const GlobalAddress&) = default;
};

constexpr GlobalAddress decode_address(std::uint32_t raw) {
  return {raw,
          {static_cast<std::uint8_t>(raw >> 26), static_cast<std::uint8_t>((raw >> 20) & 63)},
          raw & (kNodeSpan - 1)};
}

// Throws Error(OffsetOutOfRange) when offset does not fit in 20 bits.
std::uint32_t encode_address(NodeAddress node, std::uint32_t offset);

constexpr std::uint32_t node_base(NodeAddress node) {
  return (std::uint32_t(node.row) << 26) | (std::uint32_t(node.col) << 20);
}

// Cores see node (0,0) as an alias for their own node.
constexpr std::uint32_t resolve_local_alias(std::uint32_t raw, NodeAddress self) {
  return (raw >> kOffsetBits) == 0 ? node_base(self) | raw : raw;
}

enum class RegionKind { LocalCore, RemoteCore, OffChipWindow, Unmapped };

const char* to_string(RegionKind k);

struct Region {
  RegionKind kind = RegionKind::Unmapped;
  std::optional<unsigned> window_id;
  // True when the offset lies beyond the backing size (core memory or
  // window). Such accesses classify normally but fault when performed.
  bool out_of_bounds = false;

  friend bool operator==(const Region&, const Region&) = default;
};

Region classify(std::uint32_t raw, const PlatformConfig& config, NodeAddress self);

} // namespace epi

template <> struct std::hash<epi::NodeAddress> {
  std::size_t operator()(epi::NodeAddress n) const noexcept { return n.id(); }
};
