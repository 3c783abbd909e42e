#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qready/bench.hpp"
#include "qready/results_json.hpp"

using namespace qready;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  // fields in these reports never contain quotes or commas except the error column
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(row);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

BenchConfig fast_config() {
  BenchConfig cfg;
  cfg.sampler.num_starts = 1;
  cfg.sampler.max_moves = 3000;
  cfg.sampler.time_limit = 30;
  cfg.sampler.seed = 17;
  cfg.sampler.max_samples = 50;
  return cfg;
}

InstanceResult fake(const std::string& name, std::size_t n, double dens, std::optional<double> ref,
                    double best) {
  InstanceResult r;
  r.name = name;
  r.num_variables = n;
  r.num_nonzeros = 3;
  r.density = dens;
  r.best_known_energy = ref;
  RepeatResult rr;
  rr.best_energy = best;
  rr.best_bits = SolutionVector(n, 0);
  rr.first_found_time = 0.25;
  rr.end_time = 1.5;
  rr.num_samples = 10;
  rr.elite_count = 2;
  r.repeats = {rr};
  const auto c = classify(ref, best);
  r.relative_delta_energy = c.relative_delta_energy;
  r.outcome = c.outcome;
  r.delta_is_absolute = c.delta_is_absolute;
  return r;
}

}  // namespace

TEST_CASE("best-of-repeats selection breaks ties to the lowest index") {
  std::vector<RepeatResult> r(4);
  r[0].best_energy = -3;
  r[1].best_energy = -5;
  r[2].best_energy = -5;
  r[3].best_energy = -4;
  CHECK(select_repeat(r) == 1);
  for (auto& x : r) x.best_energy = 1.0;
  CHECK(select_repeat(r) == 0);
  CHECK_THROWS(select_repeat({}));
}

TEST_CASE("classification against the reference") {
  auto c = classify(-100.0, -101.0);
  CHECK(c.outcome == Outcome::win);
  CHECK(*c.relative_delta_energy == doctest::Approx(0.01));
  c = classify(-100.0, -99.0);
  CHECK(c.outcome == Outcome::loss);
  CHECK(*c.relative_delta_energy < 0);
  c = classify(-100.0, -100.0);
  CHECK(c.outcome == Outcome::tie);
  CHECK(*c.relative_delta_energy == 0.0);
  c = classify(-1e6, -1e6 - 1e-7);  // 1e-13 relative: a real difference
  CHECK(c.outcome == Outcome::win);
  CHECK(*c.relative_delta_energy == doctest::Approx(1e-13).epsilon(1e-3));
  c = classify(0.0, -2.0);
  CHECK(c.outcome == Outcome::win);
  CHECK(c.delta_is_absolute);
  CHECK(*c.relative_delta_energy == 2.0);
  c = classify(std::nullopt, -2.0);
  CHECK(c.outcome == Outcome::unknown);
  CHECK_FALSE(c.relative_delta_energy.has_value());
}

TEST_CASE("symmetric log axis keeps 1e-13 visible") {
  const double top = 1e-2;
  CHECK(symlog_position(0.0, top) == 0.0);
  const double p13 = symlog_position(1e-13, top);
  const double p14 = symlog_position(1e-14, top);
  CHECK(p13 > p14);
  CHECK(p14 > 0.0);
  CHECK(p13 > 0.05);  // more than a pixel or two on a ~300px half axis
  CHECK(symlog_position(-1e-13, top) == -p13);
  CHECK(symlog_position(1e-2, top) == doctest::Approx(1.0));
  CHECK(symlog_position(1e-5, top) < symlog_position(1e-4, top));
}

TEST_CASE("seeds per repeat") {
  CHECK(repeat_seed(10, 0) == 10);
  CHECK(repeat_seed(10, 3) == 9);
}

TEST_CASE("config validation") {
  BenchConfig cfg;
  cfg.repeats = 0;
  CHECK_THROWS(cfg.validate());
  cfg.repeats = 1;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("toy run: identical repeats select index 0") {
  const QuboInstance q(2, {{{0, 0}, 1.0}, {{0, 1}, -2.0}, {{1, 1}, 1.0}});
  BenchConfig cfg = fast_config();
  cfg.repeats = 3;
  // per-repeat seeds differ but the toy optimum is reached every time
  const InstanceResult r = evaluate_instance("toy", q, 0.0, cfg);
  REQUIRE(r.repeats.size() == 3);
  for (const auto& rr : r.repeats) CHECK(rr.best_energy == 0.0);
  CHECK(r.selected_repeat == 0);
  CHECK(r.outcome == Outcome::tie);
  CHECK(*r.relative_delta_energy == 0.0);
}

TEST_CASE("known optimum as catalog value classifies as tie") {
  TempDir tmp("qready-bench-known");
  std::mt19937_64 rng(3);
  const QuboInstance q = oracle::random_qubo(12, 0.5, rng, true);
  const double opt = oracle::brute_force(q).min_energy;
  std::ofstream(tmp.path / "known12.txt") << write_instance(q);

  BenchConfig cfg = fast_config();
  cfg.repeats = 2;
  cfg.instances_dir = tmp.path;
  cfg.catalog.push_back({"known12", 12, q.num_off_diagonal(), density(12, q.num_off_diagonal()), opt,
                         Sense::minimize, false});
  cfg.output_dir = tmp.path / "out";
  const BenchReport rep = run_benchmark(cfg);
  REQUIRE(rep.instances.size() == 1);
  const InstanceResult& r = rep.instances[0];
  REQUIRE(r.ok());
  CHECK(r.selected().best_energy == opt);
  CHECK(r.outcome == Outcome::tie);
  CHECK(*r.relative_delta_energy == 0.0);

  // raw sample sets persisted and re-validating
  for (int k = 0; k < 2; ++k) {
    const fs::path f = cfg.output_dir / "known12" / ("repeat-" + std::to_string(k) + ".json");
    REQUIRE(fs::exists(f));
    const SampleSet s = sample_set_from_json(nlohmann::json::parse(slurp(f)));
    for (const auto& smp : s.samples) CHECK(energies_close(smp.energy, oracle::naive_energy(q, smp.bits)));
  }
  CHECK(fs::exists(cfg.output_dir / "known12" / "diversity" / "diversity.svg"));
}

TEST_CASE("failing instances are recorded and the run continues") {
  TempDir tmp("qready-bench-fail");
  std::ofstream(tmp.path / "bad.txt") << "2 2\n1 2 1\n";
  std::ofstream(tmp.path / "good.txt") << "2 3\n1 1 1\n1 2 -2\n2 2 1\n";
  BenchConfig cfg = fast_config();
  cfg.repeats = 1;
  cfg.instances = {(tmp.path / "bad.txt").string(), "missing", (tmp.path / "good.txt").string()};
  const BenchReport rep = run_benchmark(cfg);
  REQUIRE(rep.instances.size() == 3);
  CHECK_FALSE(rep.instances[0].ok());
  CHECK(rep.instances[0].error.find("declared 2 entries, found 1") != std::string::npos);
  CHECK_FALSE(rep.instances[1].ok());
  CHECK(rep.instances[2].ok());
  CHECK(rep.failures() == 2);
  const std::string csv = report_csv(rep, SortKey::problem_size);
  CHECK(csv.find("failed") != std::string::npos);
}

TEST_CASE("empty report gives a header-only CSV") {
  const std::string csv = report_csv(BenchReport{}, SortKey::relative_delta_energy);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(csv.rfind("name,num_variables,num_nonzeros,density,best_known_energy,", 0) == 0);
}

TEST_CASE("sort orders") {
  BenchReport r;
  r.instances.push_back(fake("c", 30, 0.1, -100.0, -99.0));
  r.instances.push_back(fake("a", 10, 0.3, -100.0, -101.0));
  r.instances.push_back(fake("b", 20, 0.2, std::nullopt, -5.0));
  r.instances.push_back(fake("d", 10, 0.05, -100.0, -100.0));
  CHECK(sorted_order(r, SortKey::problem_size) == std::vector<std::size_t>{1, 3, 2, 0});
  CHECK(sorted_order(r, SortKey::problem_density) == std::vector<std::size_t>{3, 0, 2, 1});
  CHECK(sorted_order(r, SortKey::relative_delta_energy) == std::vector<std::size_t>{0, 3, 1, 2});
  const auto rows = csv_rows(report_csv(r, SortKey::problem_size));
  CHECK(rows[1][0] == "a");
  CHECK(rows[2][0] == "d");
}

TEST_CASE("emission is byte-stable and CSV agrees with JSON") {
  BenchReport r;
  r.instances.push_back(fake("x1", 10, 1.0 / 3.0, -100.0, -100.5));
  r.instances.push_back(fake("x2", 12, 0.25, -1e6, -1e6 + 1e-7));
  r.instances.push_back(fake("x3", 8, 0.5, std::nullopt, -2.0));
  InstanceResult failed;
  failed.name = "x4";
  failed.error = "line 3: duplicate pair (1, 2)";
  r.instances.push_back(failed);

  TempDir tmp("qready-bench-emit");
  emit_report(r, SortKey::relative_delta_energy, tmp.path / "a");
  emit_report(r, SortKey::relative_delta_energy, tmp.path / "b");
  for (const char* f : {"report.csv", "report.json", "rde-by-relative_delta_energy.svg",
                        "rde-by-problem_size.svg", "rde-by-problem_density.svg", "time-markers.svg",
                        "elite-counts.svg"}) {
    REQUIRE(fs::exists(tmp.path / "a" / f));
    CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
  }

  const auto rows = csv_rows(slurp(tmp.path / "a" / "report.csv"));
  const auto j = nlohmann::json::parse(slurp(tmp.path / "a" / "report.json"));
  REQUIRE(rows.size() == 5);
  REQUIRE(j["instances"].size() == 4);
  const auto& hdr = rows[0];
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(hdr.begin(), hdr.end(), name) - hdr.begin());
  };
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& row = rows[i + 1];
    const auto& ji = j["instances"][i];
    CHECK(row[col("name")] == ji["name"].get<std::string>());
    CHECK(std::stoul(row[col("num_variables")]) == ji["num_variables"].get<std::size_t>());
    CHECK(std::stod(row[col("density")]) == ji["density"].get<double>());
    CHECK(row[col("status")] == ji["status"].get<std::string>());
    if (ji["status"] != "ok") continue;
    CHECK(std::stod(row[col("best_energy")]) == ji["best_energy"].get<double>());
    CHECK(row[col("classification")] == ji["classification"].get<std::string>());
    CHECK(std::stod(row[col("end_time")]) == ji["end_time"].get<double>());
    CHECK(std::stoul(row[col("elite_count")]) == ji["elite_count"].get<std::size_t>());
    if (ji["relative_delta_energy"].is_null()) {
      CHECK(row[col("relative_delta_energy")].empty());
    } else {
      CHECK(std::stod(row[col("relative_delta_energy")]) == ji["relative_delta_energy"].get<double>());
    }
  }
  // the 1e-13 win is plotted off the zero line
  const std::string svg = slurp(tmp.path / "a" / "rde-by-relative_delta_energy.svg");
  CHECK(svg.find("#1f5fbf") != std::string::npos);
  CHECK(svg.find("#c8322d") != std::string::npos);
}

TEST_CASE("report energies re-validate against stored bits") {
  TempDir tmp("qready-bench-revalidate");
  std::mt19937_64 rng(4);
  const QuboInstance q = oracle::random_qubo(30, 0.3, rng);
  std::ofstream(tmp.path / "r30.txt") << write_instance(q);
  BenchConfig cfg = fast_config();
  cfg.repeats = 3;
  cfg.instances = {(tmp.path / "r30.txt").string()};
  const BenchReport rep = run_benchmark(cfg);
  const auto j = report_json(rep, SortKey::problem_size);
  for (const auto& inst : j["instances"]) {
    double best = INFINITY;
    for (const auto& rr : inst["repeats"]) {
      const SolutionVector bits = bits_from_string(rr["best_bits"].get<std::string>());
      CHECK(energies_close(rr["best_energy"].get<double>(), oracle::naive_energy(q, bits)));
      best = std::min(best, rr["best_energy"].get<double>());
    }
    CHECK(inst["best_energy"].get<double>() == best);
  }
}

TEST_CASE("sort key strings") {
  CHECK(sort_key_from_string("problem_size") == SortKey::problem_size);
  CHECK(sort_key_from_string("relative_delta_energy") == SortKey::relative_delta_energy);
  CHECK_THROWS(sort_key_from_string("speed"));
}
