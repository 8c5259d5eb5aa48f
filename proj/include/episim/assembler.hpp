#pragma once

#include "episim/isa.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace epi {

// A program for one core. `base` is the local offset the first byte loads at.
struct ProgramImage {
  std::uint32_t base = 0;
  std::vector<std::uint8_t> bytes;
  std::map<std::string, std::uint32_t> symbols;
  std::uint32_t entry = 0;

  std::uint32_t end() const { return base + std::uint32_t(bytes.size()); }
  // Byte length even, entry inside the image (or at base for empty images).
  bool well_formed() const;
  std::vector<std::uint16_t> halfwords() const;

  friend bool operator==(const ProgramImage&, const ProgramImage&) = default;
};

// Two-pass assembler. Grammar (docs/assembly.md):
//   [label:] MNEMONIC operands    ; comment
//   .org expr | .align n | .space n | .word expr,... | .hword expr,...
//   .float value,... | .equ name, expr | .entry expr
// Throws Error(SyntaxError | UndefinedLabel | BranchOutOfRange |
// ImmediateOutOfRange); messages carry the source line number.
ProgramImage assemble(const std::string& source);

// Reassembles to the same bytes. Undecodable halfwords become `.hword`.
std::string disassemble(const ProgramImage& image);

// Decodes every instruction in order. Throws Error(IllegalOpcode) when the
// image ends inside a 32-bit instruction.
struct ListingEntry {
  std::uint32_t offset;
  Decoded decoded;
};
std::vector<ListingEntry> decode_image(const ProgramImage& image);

// Flat binary at `path` plus a line-oriented manifest at `path + ".manifest"`.
void save_image(const ProgramImage& image, const std::string& path);
ProgramImage load_image(const std::string& path);
std::string manifest_text(const ProgramImage& image);
// Fills base/entry/symbols of `image` from manifest text.
void apply_manifest(ProgramImage& image, const std::string& text);

} // namespace epi
