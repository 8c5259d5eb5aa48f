#pragma once

#include "episim/address_map.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace epi {

struct ChipConfig {
  NodeAddress origin;
  unsigned rows = 4;
  unsigned cols = 4;

  bool contains(NodeAddress n) const {
    return n.row >= origin.row && n.row < origin.row + rows && n.col >= origin.col &&
           n.col < origin.col + cols;
  }
  friend bool operator==(const ChipConfig&, const ChipConfig&) = default;
};

// External memory reachable through the mesh address space. The window
// covers the coordinate rectangle [first, last]; blocks are numbered row-major
// inside the rectangle and each block contributes 1 MiB of address space.
struct WindowConfig {
  std::string name;
  NodeAddress first;
  NodeAddress last;
  std::uint64_t size = 0;

  bool contains(NodeAddress n) const {
    return n.row >= first.row && n.row <= last.row && n.col >= first.col && n.col <= last.col;
  }
  unsigned width() const { return unsigned(last.col - first.col + 1); }
  unsigned height() const { return unsigned(last.row - first.row + 1); }
  // Byte offset inside the backing store for a raw address in the window.
  std::uint64_t byte_offset(std::uint32_t raw) const;
  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct PlatformConfig {
  std::string name = "custom";
  std::vector<ChipConfig> chips;
  double clock_hz = 1e9;
  std::uint32_t core_mem_bytes = 32 * 1024;
  // Per direction, per chip side.
  double elink_bytes_per_cycle = 1.0;
  std::vector<WindowConfig> windows;
  // Empty means a single group holding every core.
  std::vector<std::vector<NodeAddress>> work_groups;

  // Bounding rectangle of all chips.
  NodeAddress origin() const;
  unsigned rows() const;
  unsigned cols() const;
  unsigned core_count() const;

  std::optional<unsigned> chip_of(NodeAddress n) const;
  bool is_core(NodeAddress n) const { return chip_of(n).has_value(); }
  std::optional<unsigned> window_of(NodeAddress n) const;
  std::vector<NodeAddress> cores() const;
  // Index of the work group containing `n`; cores outside every declared
  // group form their own singleton group.
  std::vector<NodeAddress> group_of(NodeAddress n) const;

  // Throws Error(InvalidConfig) with the first violated rule.
  void validate() const;

  static PlatformConfig single_chip(std::string name, NodeAddress origin, unsigned rows,
                                    unsigned cols);
  // "parallella", "e16", "e64"; throws InvalidConfig for unknown names.
  static PlatformConfig preset(const std::string& name);
  static PlatformConfig parse(const std::string& text);
  static PlatformConfig load(const std::string& path_or_preset);
  std::string serialize() const;
};

inline constexpr const char* kConfigFormat = "episim-platform/1";

} // namespace epi
