#include "episim/harness.hpp"

#include "episim/assembler.hpp"
#include "episim/error.hpp"
#include "episim/kernels.hpp"
#include "episim/platform.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace epi {
namespace {

using ojson = nlohmann::ordered_json;

bool chance(std::mt19937_64& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return double(rng() >> 11) * 0x1.0p-53 < p;
}

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

NodeAddress at(const PlatformConfig& c, unsigned r, unsigned col) {
  const NodeAddress o = c.origin();
  return {std::uint8_t(o.row + r), std::uint8_t(o.col + col)};
}

// Accepts everything and records per-packet latency.
class Sink : public MeshClient {
public:
  std::vector<std::uint64_t> histogram;
  std::uint64_t delivered = 0;
  std::uint64_t latency_sum = 0;
  std::optional<std::int64_t> min_excess;
  std::uint64_t window_begin = 0, window_end = ~0ull;
  std::uint64_t delivered_in_window = 0;
  std::uint64_t bytes_in_window = 0;
  std::uint64_t last_latency = 0;

  bool can_eject(NodeAddress, const Packet&) override { return true; }
  bool multicast_match(NodeAddress, std::uint32_t) override { return false; }
  void eject(NodeAddress here, Packet&& p, std::uint64_t cycle) override {
    const std::uint64_t lat = cycle - p.inject_cycle;
    if (histogram.size() <= lat) histogram.resize(lat + 1);
    ++histogram[lat];
    ++delivered;
    latency_sum += lat;
    last_latency = lat;
    const std::int64_t excess = std::int64_t(lat) - std::int64_t(manhattan(p.src, here));
    min_excess = min_excess ? std::min(*min_excess, excess) : excess;
    if (cycle >= window_begin && cycle < window_end) {
      ++delivered_in_window;
      bytes_in_window += p.link_bytes();
    }
  }
};

bool conserved(const Mesh& m) {
  const MeshCounters& k = m.counters();
  return k.injected + k.spawned == k.delivered + k.egressed + k.dropped + k.expired + m.occupancy();
}

NodeAddress traffic_dest(const PlatformConfig& c, TrafficKind kind, unsigned r, unsigned col,
                         std::mt19937_64& rng) {
  const unsigned R = c.rows(), C = c.cols();
  auto uniform_other = [&] {
    const unsigned self = r * C + col;
    unsigned k = unsigned(pick(rng, R * C - 1));
    if (k >= self) ++k;
    return at(c, k / C, k % C);
  };
  switch (kind) {
  case TrafficKind::UniformRandom: return R * C > 1 ? uniform_other() : at(c, r, col);
  case TrafficKind::NearestNeighbor: {
    std::vector<NodeAddress> nb;
    if (r > 0) nb.push_back(at(c, r - 1, col));
    if (r + 1 < R) nb.push_back(at(c, r + 1, col));
    if (col > 0) nb.push_back(at(c, r, col - 1));
    if (col + 1 < C) nb.push_back(at(c, r, col + 1));
    return nb.empty() ? at(c, r, col) : nb[pick(rng, nb.size())];
  }
  case TrafficKind::Transpose: return at(c, col % R, r % C);
  case TrafficKind::HotSpot:
    if (chance(rng, 0.2)) return at(c, R / 2, C / 2);
    return R * C > 1 ? uniform_other() : at(c, r, col);
  case TrafficKind::CornerToCorner:
  case TrafficKind::BitComplement: return at(c, R - 1 - r, C - 1 - col);
  case TrafficKind::Mirror: return at(c, r, C - 1 - col);
  }
  return at(c, r, col);
}

bool generates(const PlatformConfig& c, TrafficKind kind, unsigned r, unsigned col) {
  if (kind != TrafficKind::CornerToCorner) return true;
  return (r == 0 || r + 1 == c.rows()) && (col == 0 || col + 1 == c.cols());
}

std::uint64_t percentile(const std::vector<std::uint64_t>& hist, std::uint64_t total, double q) {
  if (total == 0) return 0;
  const auto need = std::uint64_t(std::ceil(q * double(total)));
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    seen += hist[i];
    if (seen >= need) return i;
  }
  return hist.empty() ? 0 : hist.size() - 1;
}

ProgramImage build(const std::string& source) { return assemble(source); }

std::uint32_t word_at(NodeAddress n, std::uint32_t offset) { return node_base(n) | offset; }

// Random cMesh writes from `sources` into a scratch word of random nodes,
// optionally biased towards one hot node.
struct Background {
  double rate;
  std::vector<NodeAddress> sources;
  std::vector<NodeAddress> targets;
  std::optional<NodeAddress> hot;
  double hot_fraction = 0;

  void inject(Simulation& sim, std::mt19937_64& rng) const {
    for (NodeAddress n : sources) {
      if (!chance(rng, rate)) continue;
      Packet p;
      p.kind = PacketKind::Write;
      p.mesh = MeshId::C;
      p.width = Width::B64;
      p.src = n;
      const bool to_hot = hot && chance(rng, hot_fraction);
      p.dest = word_at(to_hot ? *hot : targets[pick(rng, targets.size())], 0x7800);
      sim.mesh().inject(n, p, sim.cycle());
    }
  }
};

void run_with_background(Simulation& sim, const Background& bg, std::mt19937_64& rng,
                         std::uint64_t cap) {
  while (!sim.all_halted() && sim.cycle() < cap) {
    sim.step();
    bg.inject(sim, rng);
  }
  sim.run(RunUntil::all_halted(cap));
}

bool halted_cleanly(const Simulation& sim, NodeAddress n) {
  const Core& c = sim.core(n);
  return c.run_state() == RunState::Halted && c.halt_reason() == HaltReason::Trap &&
         c.trap_code() == 0u;
}

LitmusVerdict ordering_test(const PlatformConfig& config, LitmusTest test, const LitmusOptions& opt) {
  LitmusVerdict v;
  v.test = to_string(test);
  if (config.rows() < 2 || config.cols() < 2)
    throw Error(ErrorCode::InvalidConfig, "litmus tests need at least a 2x2 array");

  const NodeAddress producer = at(config, 0, 0);
  const NodeAddress near = at(config, 0, 1);
  const NodeAddress far = at(config, config.rows() - 1, config.cols() - 1);
  const NodeAddress data_node = at(config, config.rows() - 1, 0);
  const bool mp = test == LitmusTest::MessagePassingNoBarrier || test == LitmusTest::MessagePassingWithBarrier;

  Background bg{opt.background_rate, {}, config.cores(), std::nullopt, 0};
  for (NodeAddress n : config.cores())
    if (n != producer) bg.sources.push_back(n);
  if (mp) {
    bg.hot = data_node;
    bg.hot_fraction = 0.5;
  }

  for (unsigned s = 0; s < opt.seeds; ++s) {
    std::mt19937_64 rng(opt.first_seed + s);
    Simulation sim(config);
    const unsigned pad = unsigned(pick(rng, 8));

    if (mp) {
      const std::uint32_t data = word_at(data_node, kernels::kData);
      const std::uint32_t flag = word_at(near, kernels::kData);
      sim.load(producer, build(kernels::mp_producer(data, flag, test == LitmusTest::MessagePassingWithBarrier, pad)));
      sim.load(near, build(kernels::mp_consumer(data, unsigned(pick(rng, 8)))));
      sim.start_all_loaded();
      run_with_background(sim, bg, rng, 2'000'000);
      const std::uint32_t seen = sim.read32(word_at(near, kernels::kResult));
      const bool ok = halted_cleanly(sim, producer) && halted_cleanly(sim, near);
      const std::string outcome = !ok ? "incomplete" : seen == 42 ? "fresh" : "stale";
      ++v.outcomes[outcome];
      if (outcome != "fresh") ++v.violations;
      continue;
    }

    const NodeAddress first_node = far;
    const NodeAddress second_node = test == LitmusTest::SameDestWAW ? far : near;
    const std::uint32_t first = word_at(first_node, kernels::kData);
    const std::uint32_t second =
        word_at(second_node, kernels::kData + (test == LitmusTest::SameDestWAW ? 8 : 0));
    std::optional<std::uint64_t> t_first, t_second;
    sim.set_trace([&](const TraceRecord& r) {
      if (std::strcmp(r.event, "eject") != 0 || r.kind != PacketKind::Write) return;
      if (r.dest == first && !t_first) t_first = r.cycle;
      if (r.dest == second && !t_second) t_second = r.cycle;
    });
    sim.load(producer, build(kernels::two_writes(first, second, pad)));
    sim.start_all_loaded();
    run_with_background(sim, bg, rng, 2'000'000);
    std::string outcome;
    if (!t_first || !t_second || !halted_cleanly(sim, producer) || sim.read32(first) != 1 ||
        sim.read32(second) != 2)
      outcome = "incomplete";
    else
      outcome = *t_second < *t_first ? "reordered" : "in_order";
    ++v.outcomes[outcome];
    if (outcome == "incomplete" || (test == LitmusTest::SameDestWAW && outcome == "reordered"))
      ++v.violations;
  }
  v.seeds = opt.seeds;
  switch (test) {
  case LitmusTest::SameDestWAW:
  case LitmusTest::MessagePassingWithBarrier: v.pass = v.violations == 0; break;
  case LitmusTest::DiffDestWAW: v.pass = v.violations == 0 && v.outcomes.count("reordered"); break;
  default: v.pass = !v.outcomes.count("incomplete"); break;
  }
  return v;
}

LitmusVerdict mutex_test(const PlatformConfig& config, const LitmusOptions& opt, unsigned seeds) {
  LitmusVerdict v;
  v.test = to_string(LitmusTest::TestSetMutex);
  const auto cores = config.cores();
  const NodeAddress home = cores.front();
  const std::uint32_t lock = word_at(home, kernels::kLockArea);
  const unsigned rounds = opt.mutex_rounds;
  if (kernels::kLockArea + 0x100 + 4 * rounds > kernels::kResult)
    throw Error(ErrorCode::InvalidConfig, "too many mutex rounds for the owner log");

  for (unsigned s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(opt.first_seed + s);
    Simulation sim(config);
    for (NodeAddress n : cores)
      sim.load(n, build(kernels::testset_mutex(lock, rounds, unsigned(pick(rng, 16)))));
    sim.start_all_loaded();
    sim.run(RunUntil::all_halted(50'000'000));

    bool ok = sim.read32(lock + 4) == rounds;
    std::map<std::uint32_t, unsigned> owned;
    unsigned total = 0;
    for (NodeAddress n : cores) {
      ok = ok && halted_cleanly(sim, n);
      const unsigned k = sim.read32(word_at(n, kernels::kResult));
      owned[n.id()] = k;
      total += k;
    }
    ok = ok && total == rounds;
    std::map<std::uint32_t, unsigned> logged;
    for (unsigned i = 0; i < rounds; ++i)
      ++logged[sim.read32(lock + 0x100 + 4 * i)];
    for (const auto& [id, k] : logged)
      ok = ok && owned.count(id) && owned[id] == k;
    ++v.outcomes[ok ? "exclusive" : "violation"];
    if (!ok) ++v.violations;
    v.detail = std::to_string(rounds) + " rounds over " + std::to_string(cores.size()) + " cores, " +
               std::to_string(sim.cycle()) + " cycles";
  }
  v.seeds = seeds;
  v.pass = v.violations == 0;
  return v;
}

struct BarrierOutcome {
  bool same_cycle = true;
  unsigned rounds = 0;
  std::uint64_t cycles = 0;
};

BarrierOutcome barrier_run(const PlatformConfig& config, unsigned rounds, std::mt19937_64& rng) {
  BarrierOutcome out;
  out.rounds = rounds;
  const auto cores = config.cores();
  Simulation sim(config);
  for (NodeAddress n : cores)
    sim.load(n, build(kernels::wand_barrier(rounds, 1 + unsigned(pick(rng, 64)))));
  sim.start_all_loaded();
  sim.run(RunUntil::all_halted(10'000'000));
  out.cycles = sim.cycle();
  for (NodeAddress n : cores)
    out.same_cycle = out.same_cycle && halted_cleanly(sim, n);
  for (unsigned r = 0; r < rounds && out.same_cycle; ++r) {
    const std::uint32_t ref = sim.read32(word_at(cores.front(), kernels::kResult + 4 * r));
    for (NodeAddress n : cores)
      out.same_cycle = out.same_cycle && sim.read32(word_at(n, kernels::kResult + 4 * r)) == ref;
  }
  // Every core vectors to the barrier slot exactly once per round, all in one cycle.
  std::map<std::uint64_t, unsigned> vectored;
  for (const EventRecord& e : sim.events())
    if (e.what == "vector 7") ++vectored[e.cycle];
  out.same_cycle = out.same_cycle && vectored.size() == rounds;
  for (const auto& [cycle, n] : vectored)
    out.same_cycle = out.same_cycle && n == cores.size();
  return out;
}

LitmusVerdict barrier_test(const PlatformConfig& config, const LitmusOptions& opt, unsigned seeds) {
  LitmusVerdict v;
  v.test = to_string(LitmusTest::WandBarrier);
  for (unsigned s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(opt.first_seed + s);
    const BarrierOutcome b = barrier_run(config, opt.barrier_rounds, rng);
    ++v.outcomes[b.same_cycle ? "same_cycle" : "skewed"];
    if (!b.same_cycle) ++v.violations;
  }
  v.seeds = seeds;
  v.pass = v.violations == 0;
  v.detail = std::to_string(opt.barrier_rounds) + " rounds per seed over " +
             std::to_string(config.core_count()) + " cores";
  return v;
}

} // namespace

// ---- analytic model ----

PerfInputs PerfInputs::from_config(const PlatformConfig& c) {
  PerfInputs in;
  in.cores = c.core_count();
  in.clock_hz = c.clock_hz;
  in.rows = c.rows();
  in.cols = c.cols();
  for (std::size_t i = 0; i < c.chips.size() * 4 * 2; ++i)
    in.elink_bytes_per_cycle.push_back(c.elink_bytes_per_cycle);
  return in;
}

PerfModelResult perf_model(const PerfInputs& in) {
  PerfModelResult r;
  const double ghz = in.clock_hz / 1e9;
  r.peak_gflops = in.cores * 2.0 * ghz;
  r.bisection_gbps = std::min(in.rows, in.cols) * 2.0 * in.link_bytes_per_cycle * ghz;
  r.local_mem_bw_gbps = in.cores * double(in.local_ports * in.port_bytes) * ghz;
  double elink = 0;
  for (double b : in.elink_bytes_per_cycle) elink += b;
  r.offchip_gbps = elink * ghz;
  return r;
}

std::string PerfModelResult::to_json() const {
  ojson j;
  j["peak_gflops"] = peak_gflops;
  j["bisection_gbps"] = bisection_gbps;
  j["local_mem_bw_gbps"] = local_mem_bw_gbps;
  j["offchip_gbps"] = offchip_gbps;
  return j.dump(2);
}

// ---- traffic ----

const char* to_string(TrafficKind k) {
  switch (k) {
  case TrafficKind::UniformRandom: return "UniformRandom";
  case TrafficKind::NearestNeighbor: return "NearestNeighbor";
  case TrafficKind::Transpose: return "Transpose";
  case TrafficKind::HotSpot: return "HotSpot";
  case TrafficKind::CornerToCorner: return "CornerToCorner";
  case TrafficKind::Mirror: return "Mirror";
  case TrafficKind::BitComplement: return "BitComplement";
  }
  return "?";
}

std::optional<TrafficKind> parse_traffic_kind(const std::string& name) {
  for (auto k : {TrafficKind::UniformRandom, TrafficKind::NearestNeighbor, TrafficKind::Transpose,
                 TrafficKind::HotSpot, TrafficKind::CornerToCorner, TrafficKind::Mirror,
                 TrafficKind::BitComplement})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

NetStats traffic_run(const PlatformConfig& config, const TrafficPattern& pattern,
                     const TrafficOptions& options) {
  if (pattern.injection_rate < 0 || pattern.injection_rate > 1)
    throw Error(ErrorCode::Usage, "injection rate must lie in [0, 1]");
  Sink sink;
  sink.window_begin = options.warmup;
  sink.window_end = options.cycles;
  Mesh mesh(config, &sink);
  if (options.trace) mesh.set_trace(options.trace);

  const unsigned R = config.rows(), C = config.cols();
  std::mt19937_64 rng(pattern.seed);
  std::vector<std::uint32_t> backlog(std::size_t(R) * C, 0);
  NetStats st;
  st.cycles = options.cycles;
  const unsigned cut = config.origin().col + C / 2;
  std::uint64_t cut_at_warmup = 0;

  auto check = [&](std::uint64_t t) {
    if (options.check_conservation && st.conservation_ok && !conserved(mesh)) {
      st.conservation_ok = false;
      st.first_conservation_failure = t;
    }
  };

  for (std::uint64_t t = 0; t < options.cycles; ++t) {
    if (t == options.warmup) cut_at_warmup = mesh.cut_bytes(cut);
    mesh.step(t);
    for (unsigned r = 0; r < R; ++r)
      for (unsigned col = 0; col < C; ++col) {
        auto& q = backlog[r * C + col];
        if (generates(config, pattern.kind, r, col) && chance(rng, pattern.injection_rate)) {
          ++q;
          ++st.offered;
        }
        if (q == 0) continue;
        const NodeAddress here = at(config, r, col);
        if (!mesh.can_inject(here, MeshId::C)) continue;
        Packet p;
        p.kind = PacketKind::Write;
        p.mesh = MeshId::C;
        p.width = Width::B64;
        p.src = here;
        p.dest = node_base(traffic_dest(config, pattern.kind, r, col, rng));
        mesh.inject(here, p, t);
        --q;
        ++st.injected;
      }
    check(t);
  }

  const std::uint64_t window = options.cycles > options.warmup ? options.cycles - options.warmup : 0;
  if (window)
    st.bisection_bytes_per_cycle = double(mesh.cut_bytes(cut) - cut_at_warmup) / double(window);
  double util_sum = 0;
  unsigned links = 0;
  for (unsigned r = 0; r < R; ++r)
    for (unsigned col = 0; col < C; ++col)
      for (Dir d : {Dir::N, Dir::S, Dir::E, Dir::W}) {
        const bool exists = (d == Dir::N && r > 0) || (d == Dir::S && r + 1 < R) ||
                            (d == Dir::W && col > 0) || (d == Dir::E && col + 1 < C);
        if (!exists || options.cycles == 0) continue;
        const double u = double(mesh.link_bytes(at(config, r, col), d)) / (8.0 * double(options.cycles));
        util_sum += u;
        st.max_link_utilization = std::max(st.max_link_utilization, u);
        ++links;
      }
  st.mean_link_utilization = links ? util_sum / links : 0;

  for (auto q : backlog) st.abandoned += q;
  std::uint64_t t = options.cycles;
  for (std::uint64_t k = 0; k < options.drain_cap && !mesh.idle(); ++k, ++t) {
    mesh.step(t);
    check(t);
  }
  st.drained = mesh.idle() && mesh.counters().delivered == st.injected;

  st.delivered = sink.delivered;
  if (options.cycles) {
    st.offered_packets_per_cycle = double(st.offered) / double(options.cycles);
    st.offered_bytes_per_cycle = st.offered_packets_per_cycle * 8;
  }
  if (window) {
    st.accepted_packets_per_cycle = double(sink.delivered_in_window) / double(window);
    st.accepted_bytes_per_cycle = double(sink.bytes_in_window) / double(window);
  }
  st.mean_latency = sink.delivered ? double(sink.latency_sum) / double(sink.delivered) : 0;
  st.p99_latency = percentile(sink.histogram, sink.delivered, 0.99);
  st.max_latency = sink.histogram.empty() ? 0 : sink.histogram.size() - 1;
  st.min_latency_excess = sink.min_excess;
  st.max_link_bytes_per_cycle = mesh.max_link_bytes_per_cycle();
  return st;
}

std::string NetStats::to_json() const {
  ojson j;
  j["cycles"] = cycles;
  j["offered"] = offered;
  j["injected"] = injected;
  j["delivered"] = delivered;
  j["abandoned"] = abandoned;
  j["offered_packets_per_cycle"] = offered_packets_per_cycle;
  j["accepted_packets_per_cycle"] = accepted_packets_per_cycle;
  j["offered_bytes_per_cycle"] = offered_bytes_per_cycle;
  j["accepted_bytes_per_cycle"] = accepted_bytes_per_cycle;
  j["mean_latency"] = mean_latency;
  j["p99_latency"] = p99_latency;
  j["max_latency"] = max_latency;
  j["min_latency_excess"] = min_latency_excess ? ojson(*min_latency_excess) : ojson(nullptr);
  j["mean_link_utilization"] = mean_link_utilization;
  j["max_link_utilization"] = max_link_utilization;
  j["max_link_bytes_per_cycle"] = max_link_bytes_per_cycle;
  j["bisection_bytes_per_cycle"] = bisection_bytes_per_cycle;
  j["conservation_ok"] = conservation_ok;
  j["drained"] = drained;
  return j.dump(2);
}

std::uint64_t zero_load_latency(const PlatformConfig& config, NodeAddress src, NodeAddress dst) {
  Sink sink;
  Mesh mesh(config, &sink);
  if (!mesh.contains(src) || !mesh.contains(dst))
    throw Error(ErrorCode::NoSuchCore, "node outside the array");
  Packet p;
  p.kind = PacketKind::Write;
  p.mesh = MeshId::C;
  p.width = Width::B64;
  p.src = src;
  p.dest = node_base(dst);
  mesh.inject(src, p, 0);
  for (std::uint64_t t = 1; sink.delivered == 0 && t < 1'000'000; ++t)
    mesh.step(t);
  return sink.last_latency;
}

// ---- litmus ----

const char* to_string(LitmusTest t) {
  switch (t) {
  case LitmusTest::SameDestWAW: return "SameDestWAW";
  case LitmusTest::DiffDestWAW: return "DiffDestWAW";
  case LitmusTest::MessagePassingNoBarrier: return "MessagePassingNoBarrier";
  case LitmusTest::MessagePassingWithBarrier: return "MessagePassingWithBarrier";
  case LitmusTest::TestSetMutex: return "TestSetMutex";
  case LitmusTest::WandBarrier: return "WandBarrier";
  }
  return "?";
}

std::optional<LitmusTest> parse_litmus(const std::string& name) {
  for (auto t : {LitmusTest::SameDestWAW, LitmusTest::DiffDestWAW, LitmusTest::MessagePassingNoBarrier,
                 LitmusTest::MessagePassingWithBarrier, LitmusTest::TestSetMutex, LitmusTest::WandBarrier})
    if (name == to_string(t)) return t;
  return std::nullopt;
}

LitmusVerdict litmus(const PlatformConfig& config, LitmusTest test, const LitmusOptions& options) {
  // The mutex and barrier scenarios are long runs; a few seeds suffice.
  const unsigned long_seeds = std::min(options.seeds, 3u);
  switch (test) {
  case LitmusTest::TestSetMutex: return mutex_test(config, options, long_seeds);
  case LitmusTest::WandBarrier: return barrier_test(config, options, long_seeds);
  default: return ordering_test(config, test, options);
  }
}

std::string LitmusVerdict::to_json() const {
  ojson j;
  j["test"] = test;
  j["seeds"] = seeds;
  j["outcomes"] = ojson::object();
  for (const auto& [k, n] : outcomes) j["outcomes"][k] = n;
  j["violations"] = violations;
  j["pass"] = pass;
  if (!detail.empty()) j["detail"] = detail;
  return j.dump(2);
}

// ---- kernels ----

std::uint64_t timed_kernel(const PlatformConfig& config, const std::string& source) {
  Simulation sim(config);
  const NodeAddress n = config.cores().front();
  sim.load(n, build(source));
  sim.start(n);
  sim.run(RunUntil::all_halted(50'000'000));
  if (!halted_cleanly(sim, n))
    throw Error(ErrorCode::MemoryFault, "timed kernel on " + to_string(n) + " did not finish with TRAP #0");
  return sim.read32(word_at(n, kernels::kResult));
}

RwSample measure_rw_pair(const PlatformConfig& config, NodeAddress from, NodeAddress to, unsigned ops) {
  RwSample s;
  s.from = from;
  s.to = to;
  s.hops = manhattan(from, to);
  const std::uint32_t target = word_at(to, kernels::kData);
  for (bool reads : {false, true}) {
    Simulation sim(config);
    sim.load(from, build(kernels::remote_stream(target, ops, reads)));
    sim.start(from);
    sim.run(RunUntil::all_halted(10'000'000));
    if (!halted_cleanly(sim, from))
      throw Error(ErrorCode::MemoryFault, "remote stream kernel did not finish");
    (reads ? s.read_cycles : s.write_cycles) = sim.read32(word_at(from, kernels::kResult));
  }
  return s;
}

RwReport measure_rw_asymmetry(const PlatformConfig& config, std::uint64_t seed, unsigned pairs, unsigned ops) {
  RwReport rep;
  const auto cores = config.cores();
  if (cores.size() < 2) throw Error(ErrorCode::InvalidConfig, "need at least two cores");
  std::mt19937_64 rng(seed);
  double reads = 0, writes = 0;
  for (unsigned i = 0; i < pairs; ++i) {
    const NodeAddress a = cores[pick(rng, cores.size())];
    NodeAddress b = a;
    while (b == a) b = cores[pick(rng, cores.size())];
    rep.samples.push_back(measure_rw_pair(config, a, b, ops));
    reads += double(rep.samples.back().read_cycles);
    writes += double(rep.samples.back().write_cycles);
  }
  rep.ratio = writes > 0 ? reads / writes : 0;
  return rep;
}

std::string RwReport::to_json() const {
  ojson j;
  j["ratio"] = ratio;
  j["samples"] = ojson::array();
  for (const auto& s : samples)
    j["samples"].push_back({{"from", to_string(s.from)},
                            {"to", to_string(s.to)},
                            {"hops", s.hops},
                            {"write_cycles", s.write_cycles},
                            {"read_cycles", s.read_cycles}});
  return j.dump(2);
}

PipelineTiming measure_pipeline(const PlatformConfig& config) {
  PipelineTiming p;
  const unsigned n = 64;
  auto per_unit = [&](auto gen) {
    const double a = double(timed_kernel(config, gen(n)));
    const double b = double(timed_kernel(config, gen(2 * n)));
    return (b - a) / n;
  };
  p.taken_branch_penalty = per_unit([](unsigned k) { return kernels::branch_loop(k, true); }) -
                           per_unit([](unsigned k) { return kernels::branch_loop(k, false); });
  p.load_use_stall = per_unit([](unsigned k) { return kernels::load_use(k, true); }) -
                     per_unit([](unsigned k) { return kernels::load_use(k, false); });
  p.fpu_latency_rne = per_unit([](unsigned k) { return kernels::fpu_chain(k, false); });
  p.fpu_latency_truncate = per_unit([](unsigned k) { return kernels::fpu_chain(k, true); });
  p.fmadd_loop_branch_cost = per_unit([](unsigned k) { return kernels::fmadd_loop(k / 4, 8, true); }) * 4 -
                             per_unit([](unsigned k) { return kernels::fmadd_loop(k / 4, 8, false); }) * 4;

  const unsigned pairs = 256;
  p.fmadd_cycles = timed_kernel(config, kernels::fmadd_stream(pairs));
  p.fmadd_ipc = 2.0 * pairs / double(p.fmadd_cycles);
  p.fmadd_flops_per_cycle = 2.0 * pairs / double(p.fmadd_cycles);
  const double longer = double(timed_kernel(config, kernels::fmadd_stream(2 * pairs)));
  p.steady_flops_per_cycle = 2.0 * pairs / (longer - double(p.fmadd_cycles));
  return p;
}

DemoReport demo_kernels(const PlatformConfig& config) {
  DemoReport d;
  d.pipeline = measure_pipeline(config);
  d.gflops_per_core = d.pipeline.fmadd_flops_per_cycle * config.clock_hz / 1e9;

  const auto cores = config.cores();
  if (cores.size() >= 2) {
    const unsigned rounds = 32;
    Simulation sim(config);
    const NodeAddress a = cores[0], b = cores[1];
    sim.load(a, build(kernels::ping(word_at(b, kernels::kData), rounds, true)));
    sim.load(b, build(kernels::ping(word_at(a, kernels::kData), rounds, false)));
    sim.start_all_loaded();
    sim.run(RunUntil::all_halted(10'000'000));
    if (halted_cleanly(sim, a))
      d.ping_round_trip = double(sim.read32(word_at(a, kernels::kResult))) / rounds;
  }

  std::mt19937_64 rng(1);
  const BarrierOutcome b = barrier_run(config, 4, rng);
  d.barrier_rounds = b.rounds;
  d.barrier_same_cycle = b.same_cycle;
  return d;
}

std::string DemoReport::to_json() const {
  ojson j;
  j["taken_branch_penalty"] = pipeline.taken_branch_penalty;
  j["load_use_stall"] = pipeline.load_use_stall;
  j["fpu_latency_rne"] = pipeline.fpu_latency_rne;
  j["fpu_latency_truncate"] = pipeline.fpu_latency_truncate;
  j["fmadd_loop_branch_cost"] = pipeline.fmadd_loop_branch_cost;
  j["fmadd_cycles"] = pipeline.fmadd_cycles;
  j["fmadd_ipc"] = pipeline.fmadd_ipc;
  j["fmadd_flops_per_cycle"] = pipeline.fmadd_flops_per_cycle;
  j["steady_flops_per_cycle"] = pipeline.steady_flops_per_cycle;
  j["gflops_per_core"] = gflops_per_core;
  j["ping_round_trip_cycles"] = ping_round_trip;
  j["barrier_rounds"] = barrier_rounds;
  j["barrier_same_cycle"] = barrier_same_cycle;
  return j.dump(2);
}

} // namespace epi
