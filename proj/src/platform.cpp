#include "episim/platform.hpp"

#include "episim/error.hpp"

#include "json.hpp"

#include <algorithm>

namespace epi {

std::vector<NodeAddress> RunReport::halted() const {
  std::vector<NodeAddress> out;
  for (const auto& c : cores)
    if (c.state == RunState::Halted) out.push_back(c.node);
  return out;
}

std::string RunReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["cycles"] = cycles;
  j["end_cycle"] = end_cycle;
  j["stop"] = stop;
  ordered_json halted_list = ordered_json::array();
  ordered_json traps = ordered_json::object();
  ordered_json per_core = ordered_json::array();
  std::uint64_t instructions = 0, flops = 0, dual = 0;
  for (const auto& c : cores) {
    const std::string name = to_string(c.node);
    if (c.state == RunState::Halted)
      halted_list.push_back({{"core", name}, {"reason", to_string(c.reason)}});
    if (c.trap) traps[name] = *c.trap;
    instructions += c.stats.instructions;
    flops += c.stats.flops;
    dual += c.stats.dual_issues;
    per_core.push_back({{"core", name},
                        {"state", to_string(c.state)},
                        {"instructions", c.stats.instructions},
                        {"active_cycles", c.stats.active_cycles},
                        {"dual_issues", c.stats.dual_issues},
                        {"flops", c.stats.flops},
                        {"dependency_stalls", c.stats.dependency_stalls},
                        {"memory_stalls", c.stats.memory_stalls},
                        {"fetch_stalls", c.stats.fetch_stalls},
                        {"remote_wait_cycles", c.stats.remote_wait_cycles},
                        {"penalty_cycles", c.stats.penalty_cycles},
                        {"taken_branches", c.stats.taken_branches},
                        {"interrupts", c.stats.interrupts}});
  }
  j["halted"] = halted_list;
  j["traps"] = traps;
  j["stats"] = {{"instructions", instructions},
                {"flops", flops},
                {"dual_issues", dual},
                {"packets_injected", network.injected},
                {"packets_delivered", network.delivered},
                {"packets_egressed", network.egressed},
                {"packets_dropped", network.dropped},
                {"cores", per_core}};
  return j.dump(2);
}

// Data side of one core for one cycle.
class Simulation::Port : public DataPort {
public:
  Port(Simulation& sim, Node& n) : sim_(sim), n_(n) {}

  LoadResult load(std::uint32_t addr, Width w) override {
    const std::uint32_t g = resolve_local_alias(addr, n_.id);
    const Region r = classify(g, sim_.config_, n_.id);
    if (r.kind == RegionKind::Unmapped || r.out_of_bounds) return {Access::Fault, 0};
    if (r.kind == RegionKind::LocalCore) {
      const std::uint32_t off = decode_address(g).offset;
      if (!n_.banks.claim(off)) return {Access::Stall, 0};
      return {Access::Ok, n_.memory.read(off, w)};
    }
    Packet p;
    p.kind = PacketKind::ReadRequest;
    p.mesh = MeshId::R;
    p.width = w;
    p.dest = g;
    p.src = n_.id;
    p.sink = ReplySink::CoreLoad;
    p.reply_to = node_base(n_.id);
    if (!sim_.mesh_->inject(n_.id, p, sim_.cycle_)) return {Access::Stall, 0};
    return {Access::Pending, 0};
  }

  Access store(std::uint32_t addr, Width w, std::uint64_t value) override {
    Packet p;
    p.width = w;
    p.data = value;
    p.src = n_.id;
    if (n_.core.state().config & config_bits::kMulticastStores) {
      if (decode_address(addr).offset + bytes_of(w) > sim_.config_.core_mem_bytes)
        return Access::Fault;
      p.kind = PacketKind::Multicast;
      p.mesh = MeshId::C;
      p.dest = addr;
      return sim_.mesh_->inject(n_.id, p, sim_.cycle_) ? Access::Ok : Access::Stall;
    }
    const std::uint32_t g = resolve_local_alias(addr, n_.id);
    const Region r = classify(g, sim_.config_, n_.id);
    if (r.kind == RegionKind::Unmapped || r.out_of_bounds) return Access::Fault;
    if (r.kind == RegionKind::LocalCore) {
      const std::uint32_t off = decode_address(g).offset;
      if (!n_.banks.claim(off)) return Access::Stall;
      n_.memory.write(off, w, value);
      return Access::Ok;
    }
    p.kind = PacketKind::Write;
    p.mesh = r.kind == RegionKind::RemoteCore ? MeshId::C : MeshId::X;
    p.dest = g;
    return sim_.mesh_->inject(n_.id, p, sim_.cycle_) ? Access::Ok : Access::Stall;
  }

  LoadResult testset(std::uint32_t addr, std::uint32_t value) override {
    const std::uint32_t g = resolve_local_alias(addr, n_.id);
    const Region r = classify(g, sim_.config_, n_.id);
    if (r.kind == RegionKind::Unmapped || r.out_of_bounds) return {Access::Fault, 0};
    if (r.kind == RegionKind::LocalCore) {
      const std::uint32_t off = decode_address(g).offset;
      if (!n_.banks.claim(off)) return {Access::Stall, 0};
      const auto old = std::uint32_t(n_.memory.read(off, Width::B32));
      if (old == 0) n_.memory.write(off, Width::B32, value);
      return {Access::Ok, old};
    }
    Packet p;
    p.kind = PacketKind::ReadRequest;
    p.mesh = MeshId::R;
    p.width = Width::B32;
    p.atomic = true;
    p.data = value;
    p.dest = g;
    p.src = n_.id;
    p.sink = ReplySink::CoreLoad;
    p.reply_to = node_base(n_.id);
    if (!sim_.mesh_->inject(n_.id, p, sim_.cycle_)) return {Access::Stall, 0};
    return {Access::Pending, 0};
  }

  std::uint32_t read_device(unsigned idx) override {
    if (idx == sreg::CYCLES) return std::uint32_t(sim_.cycle_);
    if (idx >= sreg::DMA_BASE && idx < sreg::DMA_BASE + 16) {
      const unsigned ch = (idx - sreg::DMA_BASE) / 8;
      return n_.dma[ch].read_reg((idx - sreg::DMA_BASE) % 8);
    }
    return 0;
  }

  void write_device(unsigned idx, std::uint32_t value) override {
    if (idx >= sreg::DMA_BASE && idx < sreg::DMA_BASE + 16) {
      const unsigned ch = (idx - sreg::DMA_BASE) / 8;
      if (n_.dma[ch].write_reg((idx - sreg::DMA_BASE) % 8, value, sim_.config_, n_.id))
        n_.core.raise(ch == 0 ? Interrupt::Dma0 : Interrupt::Dma1);
    }
  }

private:
  Simulation& sim_;
  Node& n_;
};

Simulation::Simulation(const PlatformConfig& config) : config_(config) {
  config_.validate();
  const NodeAddress o = config_.origin();
  nodes_.resize(std::size_t(config_.rows()) * config_.cols());
  for (NodeAddress n : config_.cores())
    nodes_[std::size_t(n.row - o.row) * config_.cols() + (n.col - o.col)] =
        std::make_unique<Node>(n, config_.core_mem_bytes);
  for (const auto& w : config_.windows)
    windows_.emplace_back(w.size, 0);
  mesh_ = std::make_unique<Mesh>(config_, static_cast<MeshClient*>(this));
}

Simulation::Node* Simulation::find(NodeAddress n) {
  const NodeAddress o = config_.origin();
  if (n.row < o.row || n.col < o.col || n.row >= o.row + config_.rows() ||
      n.col >= o.col + config_.cols())
    return nullptr;
  return nodes_[std::size_t(n.row - o.row) * config_.cols() + (n.col - o.col)].get();
}

const Simulation::Node* Simulation::find(NodeAddress n) const {
  return const_cast<Simulation*>(this)->find(n);
}

Simulation::Node& Simulation::node(NodeAddress n) {
  if (Node* p = find(n)) return *p;
  throw Error(ErrorCode::NoSuchCore, "no core at " + to_string(n));
}

const Simulation::Node& Simulation::node(NodeAddress n) const {
  return const_cast<Simulation*>(this)->node(n);
}

Core& Simulation::core(NodeAddress n) { return node(n).core; }
const Core& Simulation::core(NodeAddress n) const { return node(n).core; }
Scratchpad& Simulation::memory(NodeAddress n) { return node(n).memory; }
const Scratchpad& Simulation::memory(NodeAddress n) const { return node(n).memory; }

DmaChannel& Simulation::dma(NodeAddress n, unsigned channel) { return node(n).dma.at(channel); }

void Simulation::start_dma(NodeAddress n, unsigned channel, const DmaDescriptor& d) {
  Node& x = node(n);
  if (x.dma.at(channel).start(d, config_, n))
    x.core.raise(channel == 0 ? Interrupt::Dma0 : Interrupt::Dma1);
}

void Simulation::raise_interrupt(NodeAddress n, Interrupt slot) { node(n).core.raise(slot); }

void Simulation::log(NodeAddress n, std::string what) {
  events_.push_back({cycle_, n, std::move(what)});
}

void Simulation::load(NodeAddress core_id, const ProgramImage& image) {
  Node& n = node(core_id);
  if (!image.well_formed())
    throw Error(ErrorCode::BadImage, "malformed image");
  if (image.end() > config_.core_mem_bytes)
    throw Error(ErrorCode::ImageTooLarge, "image ends at offset " + std::to_string(image.end()) +
                                              ", core memory is " +
                                              std::to_string(config_.core_mem_bytes) + " bytes");
  n.memory.write_bytes(image.base, image.bytes.data(), image.bytes.size());
  n.loaded = true;
  n.entry = image.entry;
}

void Simulation::start(NodeAddress core_id) {
  Node& n = node(core_id);
  if (!n.loaded) throw Error(ErrorCode::NotLoaded, "core " + to_string(core_id) + " has no program");
  n.core.start(n.entry);
  log(core_id, "start");
}

void Simulation::start_all_loaded() {
  for (auto& n : nodes_)
    if (n && n->loaded) start(n->id);
}

void Simulation::reset(NodeAddress core_id) {
  Node& n = node(core_id);
  n.core.reset();
  n.memory.clear();
  for (auto& ch : n.dma) ch.reset();
  n.loaded = false;
  n.entry = 0;
  n.wand_latch = false;
  log(core_id, "reset");
}

void Simulation::reset_all() {
  for (auto& n : nodes_)
    if (n) reset(n->id);
}

namespace {

[[noreturn]] void unmapped(std::uint32_t addr, std::size_t len) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "range 0x%08x+%zu is not mapped", addr, len);
  throw Error(ErrorCode::Unmapped, buf);
}

} // namespace

std::vector<std::uint8_t> Simulation::read(std::uint32_t addr, std::size_t len) const {
  std::vector<std::uint8_t> out(len);
  std::size_t done = 0;
  while (done < len) {
    const std::uint64_t a = std::uint64_t(addr) + done;
    if (a > 0xffffffffull) unmapped(addr, len);
    const GlobalAddress g = decode_address(std::uint32_t(a));
    const std::size_t chunk = std::min<std::size_t>(len - done, kNodeSpan - g.offset);
    if (const Node* n = find(g.node)) {
      if (g.offset + chunk > config_.core_mem_bytes) unmapped(addr, len);
      n->memory.read_bytes(g.offset, out.data() + done, chunk);
    } else if (auto w = config_.window_of(g.node)) {
      const std::uint64_t off = config_.windows[*w].byte_offset(g.raw);
      if (off + chunk > windows_[*w].size()) unmapped(addr, len);
      std::copy_n(windows_[*w].begin() + std::ptrdiff_t(off), chunk, out.begin() + std::ptrdiff_t(done));
    } else {
      unmapped(addr, len);
    }
    done += chunk;
  }
  return out;
}

void Simulation::write(std::uint32_t addr, std::span<const std::uint8_t> bytes) {
  // Validate the whole range before touching anything.
  (void)read(addr, bytes.size());
  std::size_t done = 0;
  while (done < bytes.size()) {
    const GlobalAddress g = decode_address(std::uint32_t(addr + done));
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - done, kNodeSpan - g.offset);
    if (Node* n = find(g.node)) {
      n->memory.write_bytes(g.offset, bytes.data() + done, chunk);
    } else {
      const unsigned w = *config_.window_of(g.node);
      const std::uint64_t off = config_.windows[w].byte_offset(g.raw);
      std::copy_n(bytes.begin() + std::ptrdiff_t(done), chunk, windows_[w].begin() + std::ptrdiff_t(off));
    }
    done += chunk;
  }
}

std::uint32_t Simulation::read32(std::uint32_t addr) const {
  const auto b = read(addr, 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void Simulation::write32(std::uint32_t addr, std::uint32_t value) {
  const std::uint8_t b[4] = {std::uint8_t(value), std::uint8_t(value >> 8), std::uint8_t(value >> 16),
                             std::uint8_t(value >> 24)};
  write(addr, b);
}

bool Simulation::can_eject(NodeAddress at, const Packet& p) {
  if (p.kind != PacketKind::ReadRequest) return true;
  const auto m = select_mesh(PacketKind::ReadReply, p.reply_to, at, config_);
  return m && mesh_->can_inject(at, *m);
}

void Simulation::eject(NodeAddress at, Packet&& p, std::uint64_t cycle) {
  Node& n = node(at);
  const std::uint32_t off = decode_address(p.dest).offset;
  switch (p.kind) {
  case PacketKind::Write:
  case PacketKind::Multicast:
    n.banks.claim(off);
    n.memory.write(off, p.width, p.data);
    break;
  case PacketKind::ReadReply:
    if (p.sink == ReplySink::CoreLoad) {
      n.core.complete_remote(p.data, cycle);
    } else {
      n.banks.claim(off);
      n.memory.write(off, p.width, p.data);
    }
    break;
  case PacketKind::ReadRequest: {
    n.banks.claim(off);
    Packet reply;
    reply.kind = PacketKind::ReadReply;
    reply.width = p.width;
    reply.src = at;
    reply.dest = p.reply_to;
    reply.sink = p.sink;
    if (p.atomic) {
      const auto old = std::uint32_t(n.memory.read(off, Width::B32));
      if (old == 0) n.memory.write(off, Width::B32, std::uint32_t(p.data));
      reply.data = old;
    } else {
      reply.data = n.memory.read(off, p.width);
    }
    reply.mesh = *select_mesh(PacketKind::ReadReply, reply.dest, at, config_);
    mesh_->inject(at, reply, cycle);
    break;
  }
  }
}

bool Simulation::multicast_match(NodeAddress at, std::uint32_t match) {
  const Node* n = find(at);
  return n && n->core.state().multicast == match;
}

bool Simulation::can_egress(NodeAddress edge, Dir side, const Packet& p) {
  if (p.kind != PacketKind::ReadRequest) return true;
  Packet reply;
  reply.width = p.width;
  reply.kind = PacketKind::ReadReply;
  return mesh_->can_inject_edge(edge, side, MeshId::X, reply.link_bytes());
}

void Simulation::egress(NodeAddress edge, Dir side, Packet&& p, std::uint64_t cycle) {
  const unsigned w = *config_.window_of(decode_address(p.dest).node);
  auto& store = windows_[w];
  const std::uint64_t off = config_.windows[w].byte_offset(p.dest);
  const unsigned size = bytes_of(p.width);
  if (off + size > store.size()) {
    unroutable(edge, p, cycle);
    return;
  }
  if (p.kind == PacketKind::ReadRequest) {
    std::uint64_t v = 0;
    for (unsigned k = 0; k < size; ++k) v |= std::uint64_t(store[off + k]) << (8 * k);
    if (p.atomic) {
      if (std::uint32_t(v) == 0)
        for (unsigned k = 0; k < 4; ++k) store[off + k] = std::uint8_t(p.data >> (8 * k));
    }
    Packet reply;
    reply.kind = PacketKind::ReadReply;
    reply.mesh = MeshId::X;
    reply.width = p.width;
    reply.src = decode_address(p.dest).node;
    reply.dest = p.reply_to;
    reply.sink = p.sink;
    reply.data = v;
    mesh_->inject_edge(edge, side, reply, cycle);
    return;
  }
  for (unsigned k = 0; k < size; ++k) store[off + k] = std::uint8_t(p.data >> (8 * k));
}

void Simulation::unroutable(NodeAddress edge, const Packet& p, std::uint64_t cycle) {
  (void)edge, (void)cycle;
  if (Node* n = find(p.src)) {
    n->core.raise(Interrupt::MemoryFault);
    log(p.src, "network fault");
  }
}

void Simulation::group_effects(const std::vector<std::pair<NodeAddress, CoreEvent>>& raised) {
  for (const auto& [who, ev] : raised) {
    if (ev.kind == CoreEvent::Sync) {
      for (NodeAddress m : config_.group_of(who)) node(m).core.raise(Interrupt::SyncReset);
      log(who, "sync");
    } else if (ev.kind == CoreEvent::MultiBreakpoint) {
      for (NodeAddress m : config_.group_of(who)) {
        Core& c = node(m).core;
        if (c.run_state() == RunState::Running || c.run_state() == RunState::Idle)
          c.halt(HaltReason::MultiBreakpoint);
      }
      log(who, "mbkpt");
    } else if (ev.kind == CoreEvent::Wand) {
      node(who).wand_latch = true;
    }
  }
  // Wired-AND barriers, evaluated once every core has stepped.
  for (const auto& [who, ev] : raised) {
    if (ev.kind != CoreEvent::Wand) continue;
    const auto group = config_.group_of(who);
    const bool all = std::all_of(group.begin(), group.end(),
                                 [&](NodeAddress m) { return node(m).wand_latch; });
    if (!all) continue;
    for (NodeAddress m : group) {
      node(m).wand_latch = false;
      node(m).core.raise(Interrupt::Wand);
    }
    log(who, "wand release");
  }
}

void Simulation::step() {
  for (auto& n : nodes_)
    if (n) n->banks.clear();

  mesh_->step(cycle_);

  for (auto& n : nodes_) {
    if (!n) continue;
    for (auto& ch : n->dma) {
      DmaContext ctx{n->id, config_, n->memory, n->banks, *mesh_, cycle_};
      const DmaEvent e = ch.cycle(ctx);
      if (e == DmaEvent::Completed) {
        n->core.raise(ch.id() == 0 ? Interrupt::Dma0 : Interrupt::Dma1);
        log(n->id, "dma" + std::to_string(ch.id()) + " done");
      } else if (e == DmaEvent::Faulted) {
        n->core.raise(Interrupt::MemoryFault);
        log(n->id, "dma" + std::to_string(ch.id()) + " fault");
      }
    }
  }

  std::vector<std::pair<NodeAddress, CoreEvent>> raised;
  for (auto& n : nodes_) {
    if (!n) continue;
    Port port(*this, *n);
    const CoreEvent ev = n->core.cycle(cycle_, n->memory, n->banks, port);
    switch (ev.kind) {
    case CoreEvent::None: break;
    case CoreEvent::Vectored: log(n->id, "vector " + std::to_string(ev.slot)); break;
    case CoreEvent::Halted: {
      const Core& c = n->core;
      std::string what = std::string("halt ") + to_string(c.halt_reason());
      if (c.trap_code()) what += " " + std::to_string(*c.trap_code());
      log(n->id, what);
      break;
    }
    default: raised.emplace_back(n->id, ev); break;
    }
  }
  if (!raised.empty()) group_effects(raised);
  ++cycle_;
}

bool Simulation::all_halted() const {
  for (const auto& n : nodes_) {
    if (!n) continue;
    const RunState s = n->core.run_state();
    if (s == RunState::Running || s == RunState::Idle) return false;
  }
  return true;
}

bool Simulation::quiescent() const {
  if (!all_halted() || !mesh_->idle()) return false;
  for (const auto& n : nodes_)
    if (n && (n->dma[0].busy() || n->dma[1].busy())) return false;
  return true;
}

RunReport Simulation::report(std::uint64_t executed, std::string stop) const {
  RunReport r;
  r.cycles = executed;
  r.end_cycle = cycle_;
  r.stop = std::move(stop);
  for (const auto& n : nodes_) {
    if (!n) continue;
    r.cores.push_back({n->id, n->core.run_state(), n->core.halt_reason(), n->core.trap_code(),
                       n->core.stats()});
  }
  r.network = mesh_->counters();
  return r;
}

RunReport Simulation::run(const RunUntil& until) {
  std::uint64_t executed = 0;
  std::string stop = "cap";
  while (true) {
    if (until.kind == RunUntil::Cycles && executed >= until.cycles) {
      stop = "cycles";
      break;
    }
    if (until.kind == RunUntil::AllHalted && quiescent()) {
      stop = "all_halted";
      break;
    }
    if (until.kind == RunUntil::Predicate && until.predicate && until.predicate(*this)) {
      stop = "predicate";
      break;
    }
    if (executed >= until.max_cycles) break;
    step();
    ++executed;
  }
  return report(executed, stop);
}

} // namespace epi
