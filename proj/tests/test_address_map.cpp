#include "doctest.h"

#include "episim/address_map.hpp"
#include "episim/config.hpp"
#include "episim/error.hpp"

#include <random>

using namespace epi;

TEST_SUITE("address-map") {

TEST_CASE("decode splits row, column and offset") {
  CHECK(decode_address(0x8E000000) == GlobalAddress{0x8E000000, {35, 32}, 0});
  CHECK(decode_address(0x00000000) == GlobalAddress{0, {0, 0}, 0});
  CHECK(decode_address(0x80800000) == GlobalAddress{0x80800000, {32, 8}, 0});
}

TEST_CASE("encode composes the fields") {
  CHECK(encode_address({35, 32}, 0) == 0x8E000000u);
  CHECK(encode_address({0, 0}, 0x14) == 0x00000014u);
  CHECK(encode_address({32, 8}, 0x7FFC) == 0x80807FFCu);
  CHECK_THROWS_AS(encode_address({1, 1}, 1u << 20), Error);
}

TEST_CASE("encode and decode agree with an arithmetic composition") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10000; ++k) {
    const unsigned row = unsigned(rng() % 64), col = unsigned(rng() % 64);
    const std::uint32_t off = std::uint32_t(rng() % (1u << 20));
    const std::uint64_t expect = std::uint64_t(row) * 67108864u + std::uint64_t(col) * 1048576u + off;
    const std::uint32_t raw = encode_address({std::uint8_t(row), std::uint8_t(col)}, off);
    REQUIRE(raw == expect);
    const GlobalAddress g = decode_address(raw);
    REQUIRE(g.node.row == row);
    REQUIRE(g.node.col == col);
    REQUIRE(g.offset == off);
  }
}

TEST_CASE("classification against the parallella board") {
  const auto cfg = PlatformConfig::preset("parallella");
  const NodeAddress self{32, 8};
  CHECK(classify(0x8E001000, cfg, self).kind == RegionKind::OffChipWindow);
  CHECK(classify(0x8E001000, cfg, self).window_id == 0u);
  CHECK(classify(0x80800000, cfg, self).kind == RegionKind::LocalCore);
  CHECK(classify(0x00000000, cfg, self).kind == RegionKind::Unmapped);
  CHECK(classify(encode_address({35, 11}, 0x100), cfg, self).kind == RegionKind::RemoteCore);
  CHECK(classify(encode_address({35, 12}, 0), cfg, self).kind == RegionKind::Unmapped);
  // Beyond the 32 KiB scratchpad but inside the node's 1 MiB block.
  const Region r = classify(encode_address({32, 9}, 0x8000), cfg, self);
  CHECK(r.kind == RegionKind::RemoteCore);
  CHECK(r.out_of_bounds);
}

TEST_CASE("the shared window covers exactly 32 MiB") {
  const auto cfg = PlatformConfig::preset("parallella");
  const NodeAddress self{32, 8};
  CHECK(classify(0x8FFFFFFC, cfg, self).kind == RegionKind::OffChipWindow);
  CHECK_FALSE(classify(0x8FFFFFFC, cfg, self).out_of_bounds);
  CHECK(classify(0x90000000, cfg, self).kind == RegionKind::Unmapped);
  CHECK(cfg.windows.at(0).byte_offset(0x8E000000) == 0u);
  CHECK(cfg.windows.at(0).byte_offset(0x8F000010) == (16u << 20) + 0x10);
}

TEST_CASE("local alias resolves to the issuing node") {
  CHECK(resolve_local_alias(0x00000100, {32, 8}) == 0x80800100u);
  CHECK(resolve_local_alias(0x80900100, {32, 8}) == 0x80900100u);
}

TEST_CASE("node text forms") {
  CHECK(parse_node("32,8") == NodeAddress{32, 8});
  CHECK(parse_node("(35, 11)") == NodeAddress{35, 11});
  CHECK_FALSE(parse_node("64,0").has_value());
  CHECK_FALSE(parse_node("a,b").has_value());
  CHECK(to_string(NodeAddress{32, 8}) == "(32,8)");
}

TEST_CASE("manhattan distance") {
  CHECK(manhattan({0, 0}, {5, 5}) == 10u);
  CHECK(manhattan({7, 1}, {2, 3}) == 7u);
}

}
