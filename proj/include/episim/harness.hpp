#pragma once

#include "episim/config.hpp"
#include "episim/emesh.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epi {

// ---- analytic model ----

struct PerfInputs {
  unsigned cores = 0;
  double clock_hz = 0;
  unsigned rows = 0;
  unsigned cols = 0;
  double link_bytes_per_cycle = 8;
  unsigned local_ports = 4;
  unsigned port_bytes = 8;
  // One entry per directed chip-edge link, bytes per cycle.
  std::vector<double> elink_bytes_per_cycle;

  static PerfInputs from_config(const PlatformConfig& c);
};

struct PerfModelResult {
  double peak_gflops = 0;
  double bisection_gbps = 0;
  double local_mem_bw_gbps = 0;
  double offchip_gbps = 0;

  std::string to_json() const;
};

PerfModelResult perf_model(const PerfInputs& in);

// ---- synthetic traffic ----

enum class TrafficKind {
  UniformRandom,
  NearestNeighbor,
  Transpose,
  HotSpot,
  CornerToCorner,
  Mirror,        // (r, c) -> (r, cols-1-c)
  BitComplement, // (r, c) -> (rows-1-r, cols-1-c)
};
const char* to_string(TrafficKind k);
std::optional<TrafficKind> parse_traffic_kind(const std::string& name);

struct TrafficPattern {
  TrafficKind kind = TrafficKind::UniformRandom;
  double injection_rate = 0.1; // packets per node per cycle
  std::uint64_t seed = 1;
};

struct TrafficOptions {
  std::uint64_t cycles = 1000;
  // Cycles excluded from throughput and bisection figures.
  std::uint64_t warmup = 0;
  bool check_conservation = true;
  std::uint64_t drain_cap = 1'000'000;
  std::function<void(const TraceRecord&)> trace;
};

struct NetStats {
  std::uint64_t cycles = 0;
  std::uint64_t offered = 0;  // packets generated
  std::uint64_t injected = 0; // packets that entered the network
  std::uint64_t delivered = 0;
  std::uint64_t abandoned = 0; // still queued at their source when injection stopped
  double offered_packets_per_cycle = 0;
  double accepted_packets_per_cycle = 0;
  double offered_bytes_per_cycle = 0;
  double accepted_bytes_per_cycle = 0;
  double mean_latency = 0;
  std::uint64_t p99_latency = 0;
  std::uint64_t max_latency = 0;
  // Smallest (latency - Manhattan distance) over delivered packets.
  std::optional<std::int64_t> min_latency_excess;
  double mean_link_utilization = 0;
  double max_link_utilization = 0;
  unsigned max_link_bytes_per_cycle = 0;
  double bisection_bytes_per_cycle = 0;
  bool conservation_ok = true;
  std::uint64_t first_conservation_failure = 0;
  bool drained = false;

  std::string to_json() const;
};

NetStats traffic_run(const PlatformConfig& config, const TrafficPattern& pattern,
                     const TrafficOptions& options);

// Cycles from injection to ejection of a lone packet.
std::uint64_t zero_load_latency(const PlatformConfig& config, NodeAddress src, NodeAddress dst);

// ---- ordering litmus ----

enum class LitmusTest {
  SameDestWAW,
  DiffDestWAW,
  MessagePassingNoBarrier,
  MessagePassingWithBarrier,
  TestSetMutex,
  WandBarrier,
};
const char* to_string(LitmusTest t);
std::optional<LitmusTest> parse_litmus(const std::string& name);

struct LitmusOptions {
  unsigned seeds = 1000;
  std::uint64_t first_seed = 1;
  // Background cMesh writes per idle node per cycle.
  double background_rate = 0.3;
  unsigned mutex_rounds = 1000;
  unsigned barrier_rounds = 10;
};

struct LitmusVerdict {
  std::string test;
  unsigned seeds = 0;
  std::map<std::string, unsigned> outcomes;
  unsigned violations = 0;
  bool pass = false;
  std::string detail;

  std::string to_json() const;
};

LitmusVerdict litmus(const PlatformConfig& config, LitmusTest test, const LitmusOptions& options = {});

// ---- kernels on the full platform ----

struct RwSample {
  NodeAddress from, to;
  unsigned hops = 0;
  std::uint64_t write_cycles = 0;
  std::uint64_t read_cycles = 0;
  double ratio() const { return double(read_cycles) / double(write_cycles); }
};

struct RwReport {
  std::vector<RwSample> samples;
  double ratio = 0; // mean read time over mean write time
  std::string to_json() const;
};

RwSample measure_rw_pair(const PlatformConfig& config, NodeAddress from, NodeAddress to,
                         unsigned ops = 64);
RwReport measure_rw_asymmetry(const PlatformConfig& config, std::uint64_t seed = 1,
                              unsigned pairs = 32, unsigned ops = 64);

// Runs a timed kernel on the first core and returns its measured cycles.
// Throws Error(MemoryFault) when the kernel does not end in TRAP #0.
std::uint64_t timed_kernel(const PlatformConfig& config, const std::string& source);

struct PipelineTiming {
  double taken_branch_penalty = 0;
  double load_use_stall = 0;
  double fpu_latency_rne = 0;
  double fpu_latency_truncate = 0;
  double fmadd_loop_branch_cost = 0; // extra cycles per taken loop branch
  std::uint64_t fmadd_cycles = 0;
  double fmadd_ipc = 0;
  double fmadd_flops_per_cycle = 0;
  double steady_flops_per_cycle = 0;
};
PipelineTiming measure_pipeline(const PlatformConfig& config);

struct DemoReport {
  PipelineTiming pipeline;
  double gflops_per_core = 0;
  double ping_round_trip = 0; // cycles per exchange between neighbours
  std::uint64_t barrier_rounds = 0;
  bool barrier_same_cycle = false;

  std::string to_json() const;
};
DemoReport demo_kernels(const PlatformConfig& config);

} // namespace epi
