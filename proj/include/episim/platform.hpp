#pragma once

#include "episim/assembler.hpp"
#include "episim/config.hpp"
#include "episim/dma.hpp"
#include "episim/ecore.hpp"
#include "episim/emesh.hpp"
#include "episim/local_memory.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epi {

class Simulation;

struct RunUntil {
  enum Kind { Cycles, AllHalted, Predicate } kind = AllHalted;
  std::uint64_t cycles = 0;
  std::function<bool(const Simulation&)> predicate;
  // Upper bound on cycles for AllHalted / Predicate.
  std::uint64_t max_cycles = 10'000'000;

  static RunUntil for_cycles(std::uint64_t n) { return {Cycles, n, {}, n}; }
  static RunUntil all_halted(std::uint64_t cap = 10'000'000) { return {AllHalted, 0, {}, cap}; }
  static RunUntil when(std::function<bool(const Simulation&)> p, std::uint64_t cap = 10'000'000) {
    return {Predicate, 0, std::move(p), cap};
  }
};

struct CoreReport {
  NodeAddress node;
  RunState state = RunState::Stopped;
  HaltReason reason = HaltReason::None;
  std::optional<std::uint32_t> trap;
  CoreStats stats;
};

struct RunReport {
  std::uint64_t cycles = 0;    // executed by this run
  std::uint64_t end_cycle = 0; // global clock afterwards
  std::string stop;            // "cycles", "all_halted", "predicate", "cap"
  std::vector<CoreReport> cores;
  MeshCounters network;

  std::vector<NodeAddress> halted() const;
  std::string to_json() const;
};

struct EventRecord {
  std::uint64_t cycle;
  NodeAddress node;
  std::string what;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

class Simulation : private MeshClient {
public:
  // Throws Error(InvalidConfig).
  explicit Simulation(const PlatformConfig& config);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const PlatformConfig& config() const { return config_; }
  std::uint64_t cycle() const { return cycle_; }

  // Throws NoSuchCore / ImageTooLarge.
  void load(NodeAddress core, const ProgramImage& image);
  // Throws NoSuchCore / NotLoaded.
  void start(NodeAddress core);
  void start_all_loaded();
  void reset(NodeAddress core);
  void reset_all();

  // Out-of-band host access between cycles. Throws Error(Unmapped).
  std::vector<std::uint8_t> read(std::uint32_t addr, std::size_t len) const;
  void write(std::uint32_t addr, std::span<const std::uint8_t> bytes);
  std::uint32_t read32(std::uint32_t addr) const;
  void write32(std::uint32_t addr, std::uint32_t value);

  void step();
  RunReport run(const RunUntil& until);
  RunReport report(std::uint64_t executed, std::string stop) const;

  bool all_halted() const;
  bool quiescent() const; // no core running, DMA idle, mesh empty

  Core& core(NodeAddress n);
  const Core& core(NodeAddress n) const;
  Scratchpad& memory(NodeAddress n);
  const Scratchpad& memory(NodeAddress n) const;
  DmaChannel& dma(NodeAddress n, unsigned channel);
  // Host-side descriptor start. Throws ChannelBusy / InvalidDescriptor.
  void start_dma(NodeAddress n, unsigned channel, const DmaDescriptor& d);
  void raise_interrupt(NodeAddress n, Interrupt slot);

  Mesh& mesh() { return *mesh_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::vector<EventRecord>& events() const { return events_; }
  void set_trace(std::function<void(const TraceRecord&)> sink) { mesh_->set_trace(std::move(sink)); }

  std::vector<std::uint8_t>& window_store(unsigned window) { return windows_.at(window); }

private:
  struct Node {
    Node(NodeAddress id, std::uint32_t mem)
        : id(id), core(id, mem), memory(mem), dma{DmaChannel(0), DmaChannel(1)} {}
    NodeAddress id;
    Core core;
    Scratchpad memory;
    std::array<DmaChannel, 2> dma;
    BankClaims banks;
    bool loaded = false;
    std::uint32_t entry = 0;
    bool wand_latch = false;
  };
  class Port;
  friend class Port;

  Node& node(NodeAddress n);
  const Node& node(NodeAddress n) const;
  Node* find(NodeAddress n);
  const Node* find(NodeAddress n) const;
  void log(NodeAddress n, std::string what);
  void group_effects(const std::vector<std::pair<NodeAddress, CoreEvent>>& raised);

  bool can_eject(NodeAddress at, const Packet& p) override;
  void eject(NodeAddress at, Packet&& p, std::uint64_t cycle) override;
  bool multicast_match(NodeAddress at, std::uint32_t match) override;
  bool can_egress(NodeAddress edge, Dir side, const Packet& p) override;
  void egress(NodeAddress edge, Dir side, Packet&& p, std::uint64_t cycle) override;
  void unroutable(NodeAddress edge, const Packet& p, std::uint64_t cycle) override;

  PlatformConfig config_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::vector<std::uint8_t>> windows_;
  std::unique_ptr<Mesh> mesh_;
  std::uint64_t cycle_ = 0;
  std::vector<EventRecord> events_;
};

} // namespace epi
