#include "doctest.h"

#include "episim/emesh.hpp"
#include "episim/harness.hpp"
#include "episim/kernels.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace epi;

namespace {

struct Arrival {
  NodeAddress at;
  Packet p;
  std::uint64_t cycle;
};

// Accepts everything; multicast acceptance is decided by `accepts`.
class Recorder : public MeshClient {
public:
  std::vector<Arrival> got;
  std::vector<Arrival> out;
  std::function<bool(NodeAddress, std::uint32_t)> accepts = [](NodeAddress, std::uint32_t) { return true; };
  bool egress_ok = true;

  bool can_eject(NodeAddress, const Packet&) override { return true; }
  void eject(NodeAddress at, Packet&& p, std::uint64_t cycle) override { got.push_back({at, p, cycle}); }
  bool multicast_match(NodeAddress at, std::uint32_t m) override { return accepts(at, m); }
  bool can_egress(NodeAddress, Dir, const Packet&) override { return egress_ok; }
  void egress(NodeAddress at, Dir, Packet&& p, std::uint64_t cycle) override { out.push_back({at, p, cycle}); }
};

Packet write_to(NodeAddress src, NodeAddress dst, std::uint32_t offset = 0, std::uint64_t data = 0) {
  Packet p;
  p.kind = PacketKind::Write;
  p.mesh = MeshId::C;
  p.width = Width::B64;
  p.src = src;
  p.dest = encode_address(dst, offset);
  p.data = data;
  return p;
}

PlatformConfig grid(unsigned rows, unsigned cols) { return PlatformConfig::single_chip("g", {0, 0}, rows, cols); }

NodeAddress nd(unsigned r, unsigned c) { return {std::uint8_t(r), std::uint8_t(c)}; }

} // namespace

TEST_SUITE("emesh") {

TEST_CASE("columns are resolved before rows") {
  CHECK(route_decision(nd(2, 2), nd(2, 5)) == Dir::E);
  CHECK(route_decision(nd(2, 2), nd(0, 0)) == Dir::W);
  CHECK(route_decision(nd(2, 2), nd(0, 2)) == Dir::N);
  CHECK(route_decision(nd(2, 2), nd(7, 2)) == Dir::S);
  CHECK(route_decision(nd(2, 2), nd(2, 2)) == Dir::Hub);

  std::vector<Dir> path;
  NodeAddress here = nd(0, 0);
  const NodeAddress dst = nd(2, 3);
  while (here != dst) {
    const Dir d = route_decision(here, dst);
    path.push_back(d);
    here = d == Dir::E ? nd(here.row, here.col + 1) : d == Dir::W ? nd(here.row, here.col - 1)
         : d == Dir::S ? nd(here.row + 1, here.col) : nd(here.row - 1, here.col);
  }
  CHECK(path == std::vector<Dir>{Dir::E, Dir::E, Dir::E, Dir::S, Dir::S});
}

TEST_CASE("a lone packet takes one cycle per hop plus one") {
  const auto cfg = grid(8, 8);
  CHECK(zero_load_latency(cfg, nd(0, 0), nd(0, 0)) == 1u);
  CHECK(zero_load_latency(cfg, nd(0, 0), nd(0, 1)) == 2u);
  CHECK(zero_load_latency(cfg, nd(0, 0), nd(7, 7)) == 15u);
  CHECK(zero_load_latency(cfg, nd(5, 1), nd(2, 6)) == 9u);
}

TEST_CASE("round-robin alternates two streams sharing an output") {
  const auto cfg = grid(3, 3);
  Recorder rec;
  Mesh mesh(cfg, &rec);
  const NodeAddress a = nd(1, 0), b = nd(1, 1), dst = nd(1, 2);
  for (std::uint64_t t = 0; t < 200; ++t) {
    mesh.step(t);
    mesh.inject(a, write_to(a, dst), t);
    mesh.inject(b, write_to(b, dst), t);
  }
  REQUIRE(rec.got.size() > 100);
  unsigned from_a = 0, from_b = 0;
  for (std::size_t k = 10; k < rec.got.size(); ++k) {
    CHECK(rec.got[k].p.src != rec.got[k - 1].p.src);
    (rec.got[k].p.src == a ? from_a : from_b) += 1;
  }
  CHECK(from_a + 1 >= from_b);
  CHECK(from_b + 1 >= from_a);
}

TEST_CASE("a saturated link carries eight bytes per cycle") {
  const auto cfg = grid(1, 4);
  Recorder rec;
  Mesh mesh(cfg, &rec);
  const std::uint64_t cycles = 1000;
  for (std::uint64_t t = 0; t < cycles; ++t) {
    mesh.step(t);
    mesh.inject(nd(0, 0), write_to(nd(0, 0), nd(0, 3)), t);
  }
  const double per_cycle = double(mesh.link_bytes(nd(0, 1), Dir::E)) / double(cycles);
  CHECK(per_cycle == doctest::Approx(8.0).epsilon(0.01));
  CHECK(mesh.max_link_bytes_per_cycle() == 8u);
}

TEST_CASE("mesh selection by packet kind and destination") {
  const auto cfg = PlatformConfig::preset("parallella");
  const NodeAddress self{32, 8};
  CHECK(select_mesh(PacketKind::Write, encode_address({33, 9}, 0), self, cfg) == MeshId::C);
  CHECK(select_mesh(PacketKind::Write, 0x8E000000, self, cfg) == MeshId::X);
  CHECK(select_mesh(PacketKind::ReadRequest, encode_address({33, 9}, 0), self, cfg) == MeshId::R);
  CHECK(select_mesh(PacketKind::ReadRequest, 0x8E000000, self, cfg) == MeshId::R);
  CHECK(select_mesh(PacketKind::ReadReply, encode_address({32, 8}, 0), {33, 9}, cfg) == MeshId::C);
  CHECK(select_mesh(PacketKind::ReadReply, encode_address({32, 8}, 0), {35, 40}, cfg) == MeshId::X);
  CHECK_FALSE(select_mesh(PacketKind::Write, 0x00000000, self, cfg).has_value());
}

TEST_CASE("adjacent blocking read costs five cycles") {
  const auto cfg = PlatformConfig::single_chip("pair", {32, 8}, 1, 2);
  const std::uint32_t target = encode_address({32, 9}, kernels::kData);
  const auto one = timed_kernel(cfg, kernels::remote_stream(target, 64, true));
  const auto two = timed_kernel(cfg, kernels::remote_stream(target, 128, true));
  CHECK(double(two - one) / 64.0 == doctest::Approx(5.0));
}

TEST_CASE("multicast reaches every other node once") {
  const auto cfg = grid(4, 4);
  Recorder rec;
  Mesh mesh(cfg, &rec);
  std::map<std::uint16_t, unsigned> hops;
  mesh.set_trace([&](const TraceRecord& r) {
    if (std::string(r.event) == "hop") ++hops[r.at.id()];
  });
  Packet p;
  p.kind = PacketKind::Multicast;
  p.mesh = MeshId::C;
  p.width = Width::B32;
  p.src = nd(1, 1);
  p.dest = (0x2Au << 20) | 0x100;
  REQUIRE(mesh.inject(nd(1, 1), p, 0));
  for (std::uint64_t t = 1; t < 100 && !mesh.idle(); ++t)
    mesh.step(t);
  CHECK(mesh.idle());
  CHECK(hops.size() == 15);
  for (auto [id, n] : hops)
    CHECK(n == 1u);
  CHECK(hops.count(nd(1, 1).id()) == 0);
  std::set<std::uint16_t> seen;
  for (const auto& a : rec.got)
    seen.insert(a.at.id());
  CHECK(seen.size() == 15);
  CHECK(rec.got.size() == 15);
}

TEST_CASE("multicast is accepted only where the match register agrees") {
  const auto cfg = grid(4, 4);
  Recorder rec;
  rec.accepts = [](NodeAddress at, std::uint32_t m) { return m == 0x2A && at.col % 2 == 0; };
  Mesh mesh(cfg, &rec);
  Packet p;
  p.kind = PacketKind::Multicast;
  p.mesh = MeshId::C;
  p.src = nd(2, 1);
  p.dest = (0x2Au << 20) | 0x100;
  mesh.inject(nd(2, 1), p, 0);
  for (std::uint64_t t = 1; t < 100; ++t)
    mesh.step(t);
  CHECK(rec.got.size() == 8);
  for (const auto& a : rec.got)
    CHECK(a.at.col % 2 == 0);
  CHECK(mesh.counters().delivered == 8);
}

TEST_CASE("off-chip writes are throttled to the eLink rate") {
  auto cfg = PlatformConfig::preset("parallella");
  cfg.elink_bytes_per_cycle = 2.0;
  Recorder rec;
  Mesh mesh(cfg, &rec);
  const NodeAddress edge{32, 11};
  const std::uint64_t cycles = 4000;
  for (std::uint64_t t = 0; t < cycles; ++t) {
    mesh.step(t);
    Packet p = write_to(edge, {35, 32});
    p.mesh = MeshId::X;
    mesh.inject(edge, p, t);
  }
  const double rate = double(rec.out.size()) * 8.0 / double(cycles);
  CHECK(rate == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("a stalled eLink blocks only off-chip traffic") {
  auto cfg = PlatformConfig::preset("parallella");
  cfg.elink_bytes_per_cycle = 0.0;
  Recorder rec;
  Mesh mesh(cfg, &rec);
  Packet off = write_to({32, 11}, {35, 32});
  off.mesh = MeshId::X;
  mesh.inject({32, 11}, off, 0);
  mesh.inject({33, 8}, write_to({33, 8}, {33, 11}), 0);
  mesh.inject({32, 8}, write_to({32, 8}, {35, 11}), 0);
  for (std::uint64_t t = 1; t < 1000; ++t)
    mesh.step(t);
  CHECK(rec.got.size() == 2);
  CHECK(rec.out.empty());
  CHECK(mesh.occupancy() == 1u);
}

TEST_CASE("two chips side by side form one 4x8 array") {
  PlatformConfig cfg;
  cfg.name = "pair";
  cfg.chips = {{{32, 8}, 4, 4}, {{32, 12}, 4, 4}};
  cfg.elink_bytes_per_cycle = 4.0;
  cfg.validate();
  CHECK(cfg.rows() == 4);
  CHECK(cfg.cols() == 8);
  Recorder rec;
  Mesh mesh(cfg, &rec);
  const std::uint64_t cycles = 2000;
  for (std::uint64_t t = 0; t < cycles; ++t) {
    mesh.step(t);
    mesh.inject({33, 8}, write_to({33, 8}, {33, 15}), t);
    mesh.inject({34, 12}, write_to({34, 12}, {34, 15}), t);
  }
  std::uint64_t crossing = 0, local = 0;
  for (const auto& a : rec.got)
    (a.p.src.col == 8 ? crossing : local) += 1;
  CHECK(double(crossing) * 8.0 / double(cycles) == doctest::Approx(4.0).epsilon(0.02));
  CHECK(double(local) / double(cycles) == doctest::Approx(1.0).epsilon(0.02));
  // A few packets are still between the boundary and their destination.
  CHECK(mesh.link_bytes({33, 11}, Dir::E) >= crossing * 8);
  CHECK(mesh.link_bytes({33, 11}, Dir::E) <= crossing * 8 + 64);
}

TEST_CASE("same-destination writes from one source never reorder") {
  // Every interleaving of two ordered writes with single-cycle injections by
  // the other three nodes over the first four cycles.
  const auto cfg = grid(2, 2);
  const NodeAddress src = nd(0, 0), dst = nd(1, 1);
  const NodeAddress others[] = {nd(0, 1), nd(1, 0), nd(1, 1)};
  unsigned schedules = 0;
  for (unsigned gap = 0; gap < 4; ++gap) {
    for (unsigned mask = 0; mask < (1u << 12); ++mask) {
      Recorder rec;
      Mesh mesh(cfg, &rec);
      std::vector<Packet> first_second = {write_to(src, dst, 0, 1), write_to(src, dst, 0, 2)};
      std::size_t next = 0;
      std::uint64_t second_at = gap;
      for (std::uint64_t t = 0; t < 40; ++t) {
        mesh.step(t);
        for (unsigned k = 0; k < 3; ++k)
          if (t < 4 && (mask >> (k * 4 + t)) & 1)
            mesh.inject(others[k], write_to(others[k], dst, 8), t);
        if (next == 0 && mesh.inject(src, first_second[0], t)) {
          next = 1;
          second_at = t + gap;
        } else if (next == 1 && t >= second_at && mesh.inject(src, first_second[1], t)) {
          next = 2;
        }
      }
      REQUIRE(next == 2);
      std::vector<std::uint64_t> order;
      for (const auto& a : rec.got)
        if (a.p.src == src) order.push_back(a.p.data);
      REQUIRE(order == std::vector<std::uint64_t>{1, 2});
      ++schedules;
    }
  }
  CHECK(schedules == 4u * 4096u);
}

}
