#pragma once

#include "episim/address_map.hpp"
#include "episim/config.hpp"
#include "episim/isa.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace epi {

enum class MeshId : std::uint8_t { R, C, X };
inline constexpr unsigned kMeshCount = 3;
const char* to_string(MeshId m); // "rMesh" ...

// Router ports. East = increasing column, South = increasing row.
enum class Dir : std::uint8_t { N, S, E, W, Hub };
inline constexpr unsigned kDirCount = 5;
const char* to_string(Dir d);
Dir opposite(Dir d);

enum class PacketKind : std::uint8_t { Write, ReadRequest, ReadReply, Multicast };
const char* to_string(PacketKind k);

// Where a read reply lands at the requester.
enum class ReplySink : std::uint8_t { Memory, CoreLoad };

struct Packet {
  PacketKind kind = PacketKind::Write;
  MeshId mesh = MeshId::C;
  Width width = Width::B64;
  bool atomic = false; // TESTSET request
  ReplySink sink = ReplySink::Memory;
  Dir travel = Dir::Hub; // multicast copy direction; Hub at the source
  std::uint32_t dest = 0;
  std::uint32_t reply_to = 0;
  std::uint64_t data = 0;
  NodeAddress src;
  std::uint16_t hops = 0;
  std::uint64_t id = 0;
  std::uint64_t inject_cycle = 0;

  // Multicast match value: the node bits of dest.
  std::uint32_t match() const { return dest >> kOffsetBits; }
  // Bytes charged on a link: the payload, or the address for a request.
  unsigned link_bytes() const { return kind == PacketKind::ReadRequest ? 4 : bytes_of(width); }
};

Dir route_decision(NodeAddress here, NodeAddress dest);

// nullopt when the destination is unmapped. `sender` is the injecting node;
// for replies it is the node that serviced the read.
std::optional<MeshId> select_mesh(PacketKind kind, std::uint32_t dest, NodeAddress sender,
                                  const PlatformConfig& config);

// Outputs a multicast copy takes at `here` (excluding local acceptance).
// Directions leaving the array are omitted.
std::vector<Dir> multicast_forward(const Packet& p, NodeAddress here, const PlatformConfig& config);

struct TraceRecord {
  std::uint64_t cycle = 0;
  MeshId mesh = MeshId::C;
  const char* event = "";
  NodeAddress at;
  PacketKind kind = PacketKind::Write;
  std::uint32_t dest = 0;
};
inline constexpr const char* kTraceHeader = "cycle,mesh,event,row,col,kind,dest";
std::string to_csv(const TraceRecord& r);

class MeshClient {
public:
  virtual ~MeshClient() = default;
  // Asked during the grant phase; must only read start-of-cycle state.
  virtual bool can_eject(NodeAddress at, const Packet& p) = 0;
  virtual void eject(NodeAddress at, Packet&& p, std::uint64_t cycle) = 0;
  virtual bool multicast_match(NodeAddress at, std::uint32_t match) = 0;
  // Packets leaving the array through an edge towards an off-chip window.
  virtual bool can_egress(NodeAddress edge, Dir side, const Packet& p) {
    (void)edge, (void)side, (void)p;
    return false;
  }
  virtual void egress(NodeAddress edge, Dir side, Packet&& p, std::uint64_t cycle) {
    (void)edge, (void)side, (void)p, (void)cycle;
  }
  // A packet reached an edge with nothing behind it.
  virtual void unroutable(NodeAddress edge, const Packet& p, std::uint64_t cycle) {
    (void)edge, (void)p, (void)cycle;
  }
};

struct MeshCounters {
  std::uint64_t injected = 0;
  std::uint64_t spawned = 0; // extra multicast copies
  std::uint64_t delivered = 0;
  std::uint64_t egressed = 0;
  std::uint64_t dropped = 0; // unroutable
  std::uint64_t expired = 0; // multicast copies with nowhere left to go
};

// The three networks over every node of the platform. Each cycle runs a grant
// phase that reads only start-of-cycle state, then a commit phase.
class Mesh {
public:
  Mesh(const PlatformConfig& config, MeshClient* client);

  const PlatformConfig& config() const { return config_; }
  bool contains(NodeAddress n) const;

  // Local injection through the node's Hub input. False when that input is
  // full; the packet is then not taken.
  bool can_inject(NodeAddress at, MeshId m) const;
  bool inject(NodeAddress at, Packet p, std::uint64_t cycle);
  // Injection from outside the array into an edge router's outward port,
  // charged to that chip side's inbound eLink.
  bool can_inject_edge(NodeAddress edge, Dir side, MeshId m, unsigned bytes) const;
  bool inject_edge(NodeAddress edge, Dir side, Packet p, std::uint64_t cycle);

  void compute(std::uint64_t cycle);
  void commit(std::uint64_t cycle);
  void step(std::uint64_t cycle) {
    compute(cycle);
    commit(cycle);
  }

  // Sum of buffer occupancies, counted from the buffers themselves.
  std::uint64_t occupancy() const;
  bool idle() const { return occupancy() == 0; }
  const MeshCounters& counters() const { return counters_; }

  // Data bytes that crossed each directed link (N/S/E/W out of a node).
  std::uint64_t link_bytes(NodeAddress from, Dir d) const;
  std::uint64_t link_packets(NodeAddress from, Dir d) const;
  // Largest number of bytes any single link carried in one cycle.
  unsigned max_link_bytes_per_cycle() const { return max_link_bytes_cycle_; }
  // Bytes crossing the vertical cut left of `cut_col` (both directions).
  std::uint64_t cut_bytes(unsigned cut_col) const;

  void set_trace(std::function<void(const TraceRecord&)> sink) { trace_ = std::move(sink); }

private:
  struct Input {
    std::array<Packet, 2> slot; // FIFO stage + shadow register
    std::uint8_t head = 0;
    std::uint8_t count = 0;
    std::uint8_t pending = 0; // outputs still owed by the head (multicast)
    std::uint8_t granted = 0;
    bool routed = false;

    Packet& front() { return slot[head]; }
    const Packet& front() const { return slot[head]; }
    void push(const Packet& p) {
      slot[(head + count) & 1] = p;
      ++count;
    }
    void pop() {
      head ^= 1;
      --count;
      routed = false;
    }
  };
  struct Router {
    std::array<std::array<Input, kDirCount>, kMeshCount> in;
    std::array<std::array<std::uint8_t, kDirCount>, kMeshCount> rr{};
    std::uint8_t eject_rr = 0;
    unsigned load = 0;
    std::array<unsigned, kMeshCount> mload{};
  };
  static constexpr std::uint8_t kExpire = 0xff;
  struct Grant {
    std::uint32_t node;
    std::uint8_t mesh;
    std::uint8_t input;
    std::uint8_t output;
  };
  struct Bucket {
    double tokens = 0;
  };

  std::size_t index(NodeAddress n) const;
  NodeAddress node_at(std::size_t idx) const;
  std::optional<std::size_t> neighbor(std::size_t idx, Dir d) const;
  std::uint8_t wanted_outputs(std::size_t idx, const Packet& p);
  Bucket& bucket(std::size_t idx, Dir side, bool inbound);
  const Bucket& bucket(std::size_t idx, Dir side, bool inbound) const;
  double bucket_cap() const;
  void emit(std::uint64_t cycle, MeshId m, const char* ev, NodeAddress at, const Packet& p);

  PlatformConfig config_;
  MeshClient* client_;
  NodeAddress origin_;
  unsigned rows_, cols_;
  std::vector<Router> routers_;
  std::vector<std::uint16_t> chip_;
  std::vector<Bucket> buckets_; // per chip, side, direction
  std::vector<Grant> grants_;
  std::vector<std::array<std::uint64_t, 4>> link_bytes_;
  std::vector<std::array<std::uint64_t, 4>> link_packets_;
  unsigned max_link_bytes_cycle_ = 0;
  MeshCounters counters_;
  std::uint64_t next_id_ = 1;
  std::function<void(const TraceRecord&)> trace_;
};

} // namespace epi
