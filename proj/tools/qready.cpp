// qready command-line front end: solve, bench, analyze, serve.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "qready/analytics.hpp"
#include "qready/bench.hpp"
#include "qready/instance_io.hpp"
#include "qready/results_json.hpp"
#include "qready/service.hpp"
#include "qready/simd/kernels.hpp"

namespace {

using namespace qready;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct SamplerFlags {
  double time_limit = 1200.0;
  std::size_t max_samples = 700;
  std::uint64_t seed = 0;
  std::string num_starts = "auto";
  std::string tenure = "auto";
  std::size_t stagnation = 0;
  double no_progress_fraction = 0.25;
  std::string quality_bias = "quality";
  std::uint64_t max_moves = 0;
  std::string selection = "auto";

  void add_to(CLI::App* app) {
    app->add_option("--time-limit", time_limit, "Seconds per run")->capture_default_str();
    app->add_option("--max-samples", max_samples, "Size of the returned sample pool")->capture_default_str();
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
    app->add_option("--num-starts", num_starts, "Concurrent tabu walkers, or auto")->capture_default_str();
    app->add_option("--tenure", tenure, "Tabu tenure, or auto")->capture_default_str();
    app->add_option("--stagnation-restart", stagnation, "Non-improving moves before a restart (0 = auto)");
    app->add_option("--no-progress-fraction", no_progress_fraction,
                    "Speed mode stops after this fraction of the limit without progress")
        ->capture_default_str();
    app->add_option("--quality-bias", quality_bias, "quality or speed")->capture_default_str();
    app->add_option("--max-moves", max_moves, "Per-walker move budget (0 = unbounded)");
    app->add_option("--move-selection", selection, "auto, scan or heap")->capture_default_str();
  }

  SamplerParams params() const {
    SamplerParams p;
    p.time_limit = time_limit;
    p.max_samples = max_samples;
    p.seed = seed;
    p.num_starts = num_starts == "auto" ? 0 : std::stoul(num_starts);
    p.tabu_tenure = tenure == "auto" ? 0 : std::stoul(tenure);
    p.stagnation_restart = stagnation;
    p.no_progress_fraction = no_progress_fraction;
    p.quality_bias = quality_bias_from_string(quality_bias);
    p.max_moves = max_moves;
    if (selection == "auto") {
      p.selection = MoveSelection::automatic;
    } else if (selection == "scan") {
      p.selection = MoveSelection::scan;
    } else if (selection == "heap") {
      p.selection = MoveSelection::heap;
    } else {
      throw std::invalid_argument("unknown move selection '" + selection + "'");
    }
    p.validate();
    return p;
  }
};

json repeat_json(const RepeatResult& r) {
  return {{"seed", r.seed},
          {"best_energy", r.best_energy},
          {"first_found_time", r.first_found_time},
          {"end_time", r.end_time},
          {"num_samples", r.num_samples},
          {"elite_count", r.elite_count}};
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-start tabu QUBO sampler with benchmark, analytics and job service"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Sample one instance file");
  std::string solve_file;
  std::string format = "qubo";
  std::string sense = "minimize";
  std::size_t repeats_solve = 1;
  bool decompose = false;
  std::size_t subsize = 64;
  std::string out_dir;
  double tolerance = 1e-6;
  std::string linkage = "average";
  SamplerFlags sflags;
  solve->add_option("file", solve_file, "Instance in triplet format")->required();
  solve->add_option("--format", format, "qubo or maxcut")->capture_default_str();
  solve->add_option("--sense", sense, "Objective direction of a qubo file")->capture_default_str();
  solve->add_option("--repeats", repeats_solve, "Independent runs")->capture_default_str();
  solve->add_flag("--decompose", decompose, "Use the subproblem decomposition loop");
  solve->add_option("--subsize", subsize, "Subproblem size for --decompose")->capture_default_str();
  solve->add_option("--out", out_dir, "Directory for sample sets, report and diversity artifacts");
  solve->add_option("--tolerance", tolerance, "Elite tolerance")->capture_default_str();
  solve->add_option("--linkage", linkage, "single, average or complete")->capture_default_str();
  sflags.add_to(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "Run the catalog benchmark protocol");
  std::string catalog_path;
  std::string instances_dir;
  std::vector<std::string> bench_instances;
  std::size_t repeats_bench = 5;
  std::string sort_key = "relative_delta_energy";
  std::string bench_out = "bench-out";
  bool concurrent = false;
  bench->add_option("--catalog", catalog_path, "Catalog CSV with best-known energies");
  bench->add_option("--instances-dir", instances_dir, "Directory holding instance files");
  bench->add_option("--instances", bench_instances, "Instance names or paths (default: whole catalog)")->delimiter(',');
  bench->add_option("--format", format, "qubo or maxcut")->capture_default_str();
  bench->add_option("--sense", sense, "Objective direction of qubo files")->capture_default_str();
  bench->add_option("--repeats", repeats_bench, "Runs per instance")->capture_default_str();
  bench->add_option("--sort-key", sort_key, "relative_delta_energy, problem_size or problem_density")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory")->capture_default_str();
  bench->add_flag("--decompose", decompose, "Use the subproblem decomposition loop");
  bench->add_option("--subsize", subsize, "Subproblem size for --decompose")->capture_default_str();
  bench->add_option("--tolerance", tolerance, "Elite tolerance")->capture_default_str();
  bench->add_option("--linkage", linkage, "single, average or complete")->capture_default_str();
  bench->add_flag("--concurrent-instances", concurrent, "Run instances in parallel");
  SamplerFlags bflags;
  bflags.add_to(bench);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Diversity analytics for a results file");
  std::string samples_path;
  std::string analyze_out;
  std::size_t cap = 700;
  analyze_cmd->add_option("samples", samples_path, "Results JSON (schema_version 1)")->required();
  analyze_cmd->add_option("--tolerance", tolerance, "Elite tolerance")->capture_default_str();
  analyze_cmd->add_option("--linkage", linkage, "single, average or complete")->capture_default_str();
  analyze_cmd->add_option("--cap", cap, "Maximum elite size")->capture_default_str();
  analyze_cmd->add_option("--out", analyze_out, "Directory for CSV, JSON and SVG artifacts");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP job service");
  ServiceConfig scfg;
  std::string serve_catalog;
  std::string serve_instances;
  std::string data_dir = scfg.data_dir.string();
  serve->add_option("--host", scfg.host, "Bind address")->envname("QREADY_HOST")->capture_default_str();
  serve->add_option("--port", scfg.port, "Port (0 = any free port)")->envname("QREADY_PORT")->capture_default_str();
  serve->add_option("--workers", scfg.workers, "Concurrent solver jobs")->envname("QREADY_WORKERS")->capture_default_str();
  serve->add_option("--max-instance-bytes", scfg.max_instance_bytes, "Instance size cap")
      ->envname("QREADY_MAX_INSTANCE_BYTES")
      ->capture_default_str();
  serve->add_option("--data-dir", data_dir, "Job store directory")->envname("QREADY_DATA_DIR")->capture_default_str();
  serve->add_option("--time-limit", scfg.default_time_limit, "Default per-job time limit")
      ->envname("QREADY_TIME_LIMIT")
      ->capture_default_str();
  serve->add_option("--catalog", serve_catalog, "Catalog CSV for submissions by name")->envname("QREADY_CATALOG");
  serve->add_option("--instances-dir", serve_instances, "Instance files for catalog submissions")
      ->envname("QREADY_INSTANCES_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve->parsed()) {
      BenchConfig cfg;
      cfg.sampler = sflags.params();
      cfg.repeats = repeats_solve;
      cfg.decompose = decompose;
      cfg.subsize = subsize;
      cfg.elite_tolerance = tolerance;
      cfg.linkage = linkage_from_string(linkage);
      cfg.output_dir = out_dir;
      cfg.validate();
      const QuboInstance q = load_instance(solve_file, format_from_string(format), sense_from_string(sense));
      const std::string name = std::filesystem::path(solve_file).stem().string();
      BenchReport report;
      report.instances.push_back(evaluate_instance(name, q, std::nullopt, cfg));
      const InstanceResult& r = report.instances.front();
      json reps = json::array();
      for (const auto& rr : r.repeats) reps.push_back(repeat_json(rr));
      const double best = r.selected().best_energy;
      json out = {{"instance", instance_summary_json(q, name)},
                  {"simd", to_string(simd::active_isa())},
                  {"repeats", reps},
                  {"selected_repeat", r.selected_repeat},
                  {"best_energy", best},
                  {"native_best_energy", q.sense_of_origin() == Sense::maximize ? -best : best},
                  {"best_bits", bits_to_string(r.selected().best_bits)}};
      std::cout << out.dump(2) << "\n";
      if (!out_dir.empty()) emit_report(report, SortKey::relative_delta_energy, out_dir);
      return kExitOk;
    }

    if (bench->parsed()) {
      BenchConfig cfg;
      cfg.sampler = bflags.params();
      cfg.repeats = repeats_bench;
      cfg.decompose = decompose;
      cfg.subsize = subsize;
      cfg.elite_tolerance = tolerance;
      cfg.linkage = linkage_from_string(linkage);
      cfg.output_dir = bench_out;
      cfg.format = format_from_string(format);
      cfg.qubo_sense = sense_from_string(sense);
      cfg.sort_key = sort_key_from_string(sort_key);
      cfg.concurrent_instances = concurrent;
      cfg.instances = bench_instances;
      cfg.instances_dir = instances_dir;
      if (!catalog_path.empty()) cfg.catalog = load_catalog(std::filesystem::path(catalog_path));
      if (cfg.instances.empty() && cfg.catalog.empty()) {
        throw std::invalid_argument("nothing to run: give --catalog or --instances");
      }
      cfg.validate();
      const BenchReport report = run_benchmark(cfg, [](const std::string& msg) { std::cerr << msg << "\n"; });
      emit_report(report, cfg.sort_key, cfg.output_dir);
      std::cout << report_csv(report, cfg.sort_key);
      const std::size_t failed = report.failures();
      if (failed == report.instances.size() && failed > 0) return kExitInput;
      return failed > 0 ? kExitPartial : kExitOk;
    }

    if (analyze_cmd->parsed()) {
      const SampleSet s = sample_set_from_json(json::parse(read_all(samples_path)));
      if (s.empty()) throw std::invalid_argument("results file has no samples");
      const AnalyticsBundle b = analyze(s, tolerance, linkage_from_string(linkage), cap);
      std::cout << summary_json(b).dump(2) << "\n";
      if (!analyze_out.empty()) {
        write_analytics(b, analyze_out, std::filesystem::path(samples_path).stem().string());
      }
      return kExitOk;
    }

    if (serve->parsed()) {
      scfg.data_dir = data_dir;
      if (!serve_catalog.empty()) scfg.catalog = load_catalog(std::filesystem::path(serve_catalog));
      scfg.instances_dir = serve_instances;
      Service service(scfg);
      service.start();
      std::cerr << "listening on " << scfg.host << ":" << service.port() << "\n";
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      service.stop();
      return kExitOk;
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
