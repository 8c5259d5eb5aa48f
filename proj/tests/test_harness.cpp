#include "doctest.h"

#include "episim/error.hpp"
#include "episim/harness.hpp"
#include "episim/kernels.hpp"

#include <fstream>
#include <sstream>

using namespace epi;

namespace {

std::string file_text(const std::string& rel) {
  std::ifstream f(std::string(EPISIM_SOURCE_DIR) + "/" + rel);
  REQUIRE_MESSAGE(f.good(), "missing " << rel);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("analytic figures") {
  const auto e64 = perf_model(PerfInputs::from_config(PlatformConfig::preset("e64")));
  // 64 cores, one FMADD per cycle, 0.8 GHz.
  CHECK(e64.peak_gflops == doctest::Approx(64 * 2 * 0.8));
  // Eight links each way across the middle cut, 8 bytes per cycle.
  CHECK(e64.bisection_gbps == doctest::Approx(8 * 2 * 8 * 0.8));
  CHECK(e64.local_mem_bw_gbps == doctest::Approx(64 * 32 * 0.8));
  const auto e16 = perf_model(PerfInputs::from_config(PlatformConfig::preset("e16")));
  CHECK(e16.peak_gflops == doctest::Approx(16 * 2 * 0.6));
  CHECK(e16.offchip_gbps == doctest::Approx(8 * 1.0 * 0.6));
  PerfInputs custom;
  custom.cores = 4;
  custom.clock_hz = 1e9;
  custom.rows = 2;
  custom.cols = 2;
  CHECK(perf_model(custom).peak_gflops == doctest::Approx(8.0));
  CHECK(perf_model(custom).offchip_gbps == 0.0);
}

TEST_CASE("zero injection rate produces nothing") {
  TrafficOptions opt;
  opt.cycles = 500;
  const NetStats s = traffic_run(PlatformConfig::preset("e16"), {TrafficKind::UniformRandom, 0.0, 1}, opt);
  CHECK(s.offered == 0u);
  CHECK(s.delivered == 0u);
  CHECK(s.drained);
  CHECK_FALSE(s.min_latency_excess.has_value());
}

TEST_CASE("corner to corner at low load") {
  TrafficOptions opt;
  opt.cycles = 2000;
  const NetStats s = traffic_run(PlatformConfig::preset("e64"), {TrafficKind::CornerToCorner, 0.01, 4}, opt);
  REQUIRE(s.delivered > 0);
  CHECK(s.conservation_ok);
  CHECK(s.drained);
  REQUIRE(s.min_latency_excess.has_value());
  CHECK(*s.min_latency_excess == 1);
  CHECK(s.max_latency >= 15u);
  CHECK(zero_load_latency(PlatformConfig::preset("e64"), {32, 8}, {39, 15}) == 14u + 1u);
}

TEST_CASE("every pattern conserves packets and drains") {
  for (TrafficKind k : {TrafficKind::UniformRandom, TrafficKind::NearestNeighbor, TrafficKind::Transpose,
                        TrafficKind::HotSpot, TrafficKind::CornerToCorner, TrafficKind::Mirror,
                        TrafficKind::BitComplement}) {
    TrafficOptions opt;
    opt.cycles = 3000;
    const NetStats s = traffic_run(PlatformConfig::preset("e16"), {k, 0.5, 7}, opt);
    INFO(to_string(k));
    CHECK(s.conservation_ok);
    CHECK(s.drained);
    CHECK(s.delivered == s.injected);
    CHECK(s.injected + s.abandoned == s.offered);
    CHECK(parse_traffic_kind(to_string(k)) == k);
  }
}

TEST_CASE("writes stream much faster than blocking reads") {
  const auto cfg = PlatformConfig::preset("e64");
  const RwSample near = measure_rw_pair(cfg, {32, 8}, {32, 9});
  CHECK(near.ratio() >= 4.0);
  const RwSample far = measure_rw_pair(cfg, {32, 8}, {39, 15});
  CHECK(far.ratio() >= 20.0);
  CHECK(far.hops == 14u);
}

TEST_CASE("small litmus runs") {
  const auto cfg = PlatformConfig::preset("e16");
  LitmusOptions opt;
  opt.seeds = 40;
  const auto same = litmus(cfg, LitmusTest::SameDestWAW, opt);
  CHECK(same.pass);
  CHECK(same.violations == 0u);
  CHECK(same.outcomes.at("in_order") == 40u);
  const auto mp = litmus(cfg, LitmusTest::MessagePassingWithBarrier, opt);
  CHECK(mp.pass);
  CHECK(mp.violations == 0u);
  opt.mutex_rounds = 100;
  opt.barrier_rounds = 4;
  CHECK(litmus(cfg, LitmusTest::TestSetMutex, opt).pass);
  CHECK(litmus(cfg, LitmusTest::WandBarrier, opt).pass);
  CHECK(parse_litmus("DiffDestWAW") == LitmusTest::DiffDestWAW);
  CHECK_FALSE(parse_litmus("Dekker").has_value());
}

TEST_CASE("bundled kernel sources match their generators") {
  CHECK(file_text("kernels/fmadd_stream.s") == kernels::fmadd_stream(256));
  CHECK(file_text("kernels/branch_loop.s") == kernels::branch_loop(64, true));
  CHECK(file_text("kernels/wand_barrier.s") == kernels::wand_barrier(10, 100));
  CHECK(file_text("kernels/testset_mutex.s") == kernels::testset_mutex(0x80804000, 1000));
  CHECK(file_text("kernels/ping.s") == kernels::ping(encode_address({32, 9}, kernels::kData), 32, true));
  CHECK(file_text("kernels/pong.s") == kernels::ping(encode_address({32, 8}, kernels::kData), 32, false));
}

TEST_CASE("timed kernels must end cleanly") {
  CHECK_THROWS_AS(timed_kernel(PlatformConfig::preset("e16"), "  TRAP #3\n"), Error);
  CHECK(timed_kernel(PlatformConfig::preset("e16"), kernels::fmadd_stream(16)) > 0u);
}

}
