#include "episim/assembler.hpp"
#include "episim/config.hpp"
#include "episim/error.hpp"
#include "episim/harness.hpp"
#include "episim/platform.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace epi;

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Usage, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Usage, "cannot write '" + path + "'");
  f << text << "\n";
}

// Source files are assembled on the fly; anything else is a saved image.
ProgramImage load_program(const std::string& path) {
  const bool source = path.size() > 2 && (path.ends_with(".s") || path.ends_with(".asm"));
  return source ? assemble(slurp(path)) : load_image(path);
}

RunUntil parse_until(const std::string& text, std::uint64_t cap) {
  if (text == "all_halted" || text == "halted") return RunUntil::all_halted(cap);
  if (text.rfind("cycles:", 0) == 0) {
    try {
      return RunUntil::for_cycles(std::stoull(text.substr(7)));
    } catch (const std::logic_error&) {
    }
  }
  throw Error(ErrorCode::Usage, "--until expects all_halted or cycles:N, got '" + text + "'");
}

class TraceFile {
public:
  explicit TraceFile(const std::string& path) : out_(path) {
    if (!out_) throw Error(ErrorCode::Usage, "cannot write trace '" + path + "'");
    out_ << kTraceHeader << "\n";
  }
  void operator()(const TraceRecord& r) { out_ << to_csv(r) << "\n"; }

private:
  std::ofstream out_;
};

int run_cli(int argc, char** argv) {
  CLI::App app{"Deterministic manycore mesh simulator"};
  app.require_subcommand(1);

  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file into an image");
  std::string asm_in, asm_out;
  asm_cmd->add_option("input", asm_in, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", asm_out, "Image path (a .manifest is written beside it)")->required();

  auto* dis_cmd = app.add_subcommand("disasm", "Disassemble an image or source file");
  std::string dis_in;
  dis_cmd->add_option("image", dis_in)->required();

  auto* run_cmd = app.add_subcommand("run", "Load images onto cores and run");
  std::string run_config = "parallella", until = "all_halted", trace_path, report_path;
  std::vector<std::string> loads;
  std::uint64_t max_cycles = 10'000'000;
  run_cmd->add_option("--config", run_config, "Config file or preset name");
  run_cmd->add_option("--load", loads, "row,col=image (repeatable)")->required();
  run_cmd->add_option("--until", until, "all_halted | cycles:N");
  run_cmd->add_option("--max-cycles", max_cycles, "Cap for all_halted");
  run_cmd->add_option("--trace", trace_path, "Packet trace CSV");
  run_cmd->add_option("--report", report_path, "RunReport JSON (default stdout)");

  auto* traffic_cmd = app.add_subcommand("traffic", "Synthetic network traffic");
  std::string traffic_config = "e64", pattern_name = "UniformRandom", traffic_trace, traffic_out;
  TrafficPattern pattern;
  TrafficOptions topt;
  traffic_cmd->add_option("--config", traffic_config);
  traffic_cmd->add_option("--pattern", pattern_name,
                          "UniformRandom NearestNeighbor Transpose HotSpot CornerToCorner Mirror BitComplement");
  traffic_cmd->add_option("--rate", pattern.injection_rate)->check(CLI::Range(0.0, 1.0));
  traffic_cmd->add_option("--cycles", topt.cycles);
  traffic_cmd->add_option("--warmup", topt.warmup);
  traffic_cmd->add_option("--seed", pattern.seed);
  traffic_cmd->add_option("--trace", traffic_trace);
  traffic_cmd->add_option("--report", traffic_out);

  auto* litmus_cmd = app.add_subcommand("litmus", "Memory-ordering litmus test");
  std::string litmus_name, litmus_config = "e16";
  LitmusOptions lopt;
  litmus_cmd->add_option("name", litmus_name,
                         "SameDestWAW DiffDestWAW MessagePassingNoBarrier MessagePassingWithBarrier "
                         "TestSetMutex WandBarrier")
      ->required();
  litmus_cmd->add_option("--config", litmus_config);
  litmus_cmd->add_option("--seeds", lopt.seeds);
  litmus_cmd->add_option("--first-seed", lopt.first_seed);
  litmus_cmd->add_option("--background", lopt.background_rate)->check(CLI::Range(0.0, 1.0));

  auto* perf_cmd = app.add_subcommand("perfmodel", "Analytic peak figures");
  std::string perf_preset = "e64";
  perf_cmd->add_option("--preset,--config", perf_preset, "e64 | e16 | parallella | config file");

  auto* rw_cmd = app.add_subcommand("rwratio", "Remote write/read efficiency ratio");
  std::string rw_config = "e64";
  std::uint64_t rw_seed = 1;
  unsigned rw_pairs = 32;
  rw_cmd->add_option("--config", rw_config);
  rw_cmd->add_option("--seed", rw_seed);
  rw_cmd->add_option("--pairs", rw_pairs)->check(CLI::PositiveNumber);

  auto* demo_cmd = app.add_subcommand("demo", "Bundled kernels: FMADD stream, ping, WAND barrier");
  std::string demo_config = "e16";
  demo_cmd->add_option("--config", demo_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << to_string(ErrorCode::Usage) << ": " << e.what() << "\n";
    return 2;
  }

  if (*asm_cmd) {
    save_image(assemble(slurp(asm_in)), asm_out);
  } else if (*dis_cmd) {
    std::cout << disassemble(load_program(dis_in));
  } else if (*run_cmd) {
    Simulation sim(PlatformConfig::load(run_config));
    for (const std::string& spec : loads) {
      const auto eq = spec.find('=');
      const auto node = eq == std::string::npos ? std::nullopt : parse_node(spec.substr(0, eq));
      if (!node) throw Error(ErrorCode::Usage, "--load expects row,col=image, got '" + spec + "'");
      sim.load(*node, load_program(spec.substr(eq + 1)));
    }
    std::optional<TraceFile> trace;
    if (!trace_path.empty()) {
      trace.emplace(trace_path);
      sim.set_trace([&](const TraceRecord& r) { (*trace)(r); });
    }
    sim.start_all_loaded();
    emit(sim.run(parse_until(until, max_cycles)).to_json(), report_path);
  } else if (*traffic_cmd) {
    const auto kind = parse_traffic_kind(pattern_name);
    if (!kind) throw Error(ErrorCode::Usage, "unknown pattern '" + pattern_name + "'");
    pattern.kind = *kind;
    std::optional<TraceFile> trace;
    if (!traffic_trace.empty()) {
      trace.emplace(traffic_trace);
      topt.trace = [&](const TraceRecord& r) { (*trace)(r); };
    }
    emit(traffic_run(PlatformConfig::load(traffic_config), pattern, topt).to_json(), traffic_out);
  } else if (*litmus_cmd) {
    const auto test = parse_litmus(litmus_name);
    if (!test) throw Error(ErrorCode::Usage, "unknown litmus test '" + litmus_name + "'");
    const LitmusVerdict v = litmus(PlatformConfig::load(litmus_config), *test, lopt);
    std::cout << v.to_json() << "\n";
    return v.pass ? 0 : 1;
  } else if (*perf_cmd) {
    std::cout << perf_model(PerfInputs::from_config(PlatformConfig::load(perf_preset))).to_json() << "\n";
  } else if (*rw_cmd) {
    std::cout << measure_rw_asymmetry(PlatformConfig::load(rw_config), rw_seed, rw_pairs).to_json() << "\n";
  } else if (*demo_cmd) {
    std::cout << demo_kernels(PlatformConfig::load(demo_config)).to_json() << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const epi::Error& e) {
    std::cerr << "error: " << epi::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
}
