// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "qready/analytics.hpp"
#include "qready/bench.hpp"
#include "qready/decomposer.hpp"
#include "qready/instance_io.hpp"
#include "qready/service.hpp"

using namespace qready;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.pass && secs > budget_s) {
    o.pass = false;
    o.detail = "runtime over budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s %-22s %.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

void skip(const std::string& name, const std::string& why) {
  std::printf("SKIP %-22s %s\n", name.c_str(), why.c_str());
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Density column of the published table, keyed by instance name.
Verdict density_check() {
  Verdict o;
  const auto catalog = load_catalog(fs::path(QREADY_DATA_DIR) / "mqlib_catalog.csv");
  o.require(catalog.size() == 45, "catalog does not have 45 rows");
  for (const auto& e : catalog) {
    const double d = density(e.num_variables, e.num_nonzeros);
    o.require(std::abs(d - e.density) <= 0.00005, e.name + " density mismatch");
  }
  const auto* a = find_entry(catalog, "g000283");
  const auto* b = find_entry(catalog, "g000377");
  o.require(a && std::abs(density(a->num_variables, a->num_nonzeros) - 0.0718) <= 0.00005, "g000283");
  o.require(b && std::abs(density(b->num_variables, b->num_nonzeros) - 0.0007) <= 0.00005, "g000377");
  if (o.pass) o.detail = std::to_string(catalog.size()) + " rows within 5e-5";
  return o;
}

Verdict oracle_check() {
  Verdict o;
  std::mt19937_64 rng(20240601);
  int hits = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 4 + rng() % 13;
    const QuboInstance q = oracle::random_qubo(n, 0.2 + 0.6 * static_cast<double>(rng() % 100) / 100.0, rng);
    const double opt = oracle::brute_force(q).min_energy;
    SamplerParams p;
    p.time_limit = 1.0;
    p.seed = static_cast<std::uint64_t>(t);
    p.num_starts = 1;
    p.quality_bias = QualityBias::speed;
    const SampleSet s = sample(q, p);
    hits += energies_close(s.best().energy, opt, opt);
  }
  o.require(hits * 100 >= 95 * trials, "optimum rate below 95%");
  o.detail = std::to_string(hits) + "/" + std::to_string(trials) + " optimal";
  return o;
}

Verdict delta_check() {
  Verdict o;
  std::mt19937_64 rng(7);
  int done = 0;
  while (done < 10000) {
    const std::size_t n = 1 + rng() % 40;
    const QuboInstance q = oracle::random_qubo(n, 0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0, rng,
                                               rng() % 2 == 0);
    for (int r = 0; r < 20 && done < 10000; ++r, ++done) {
      SolutionVector x = oracle::random_bits(n, rng);
      const std::size_t i = rng() % n;
      const double before = oracle::naive_energy(q, x);
      const double d = flip_delta(q, x, i);
      x[i] ^= 1u;
      const double after = oracle::naive_energy(q, x);
      o.require(energies_close(before + d, after, after), "delta mismatch");
    }
  }
  o.detail = std::to_string(done) + " triples within 1e-9";
  return o;
}

Verdict clamp_check() {
  Verdict o;
  std::mt19937_64 rng(11);
  std::size_t assignments = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 14;
    const QuboInstance q = oracle::random_qubo(n, 0.5, rng);
    const SolutionVector x = oracle::random_bits(n, rng);
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 10);
    std::vector<std::uint32_t> subset(n);
    std::iota(subset.begin(), subset.end(), 0u);
    std::shuffle(subset.begin(), subset.end(), rng);
    subset.resize(k);
    const SubProblem sub = clamp_subproblem(q, x, subset);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m, ++assignments) {
      const SolutionVector y = oracle::bits_of(m, k);
      SolutionVector full = x;
      for (std::size_t j = 0; j < k; ++j) full[subset[j]] = y[j];
      const double rhs = oracle::naive_energy(q, full);
      o.require(energies_close(oracle::naive_energy(sub.sub_q, y) + sub.offset, rhs, rhs), "clamp mismatch");
    }
  }
  o.detail = std::to_string(assignments) + " sub-assignments";
  return o;
}

Verdict maxcut_check() {
  Verdict o;
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 11;
    const auto edges = oracle::random_graph(n, 0.5, rng, 10);
    const MaxCutGraph g(n, edges);
    const QuboInstance q = from_maxcut(g);
    const auto bf = oracle::brute_force(q, 0.0);
    const double best_cut = oracle::brute_force_maxcut(n, edges);
    o.require(-bf.min_energy == best_cut, "QUBO optimum differs from max cut");
    for (const auto& x : bf.optima) o.require(cut_value(g, x) == best_cut, "optimal assignment is not a max cut");
  }
  o.detail = "100 graphs exact";
  return o;
}

Verdict protocol_check() {
  Verdict o;
  std::mt19937_64 rng(17);
  const QuboInstance q = oracle::random_qubo(40, 0.3, rng);
  BenchConfig cfg;
  cfg.repeats = 5;
  cfg.sampler.time_limit = 1.0;
  cfg.sampler.num_starts = 2;
  cfg.sampler.seed = 99;
  const InstanceResult r = evaluate_instance("protocol", q, std::nullopt, cfg);
  o.require(r.ok(), "evaluation failed: " + r.error);
  o.require(r.repeats.size() == 5, "expected 5 repeats");
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < r.repeats.size(); ++i) {
    if (r.repeats[i].best_energy < r.repeats[argmin].best_energy) argmin = i;
  }
  o.require(r.selected_repeat == argmin, "selected repeat is not the lowest-index best");
  for (std::size_t i = 0; i < r.repeats.size(); ++i) {
    const auto& rep = r.repeats[i];
    o.require(rep.seed == repeat_seed(99, i), "repeat seed");
    o.require(rep.first_found_time <= rep.end_time, "first_found > end");
    o.require(rep.end_time <= cfg.sampler.time_limit + 1.0, "end beyond limit + 1 s");
    o.require(rep.num_samples <= 700, "more than 700 samples");
  }

  // Raw pool contracts on one repeat.
  SamplerParams p = cfg.sampler;
  p.seed = repeat_seed(99, 0);
  const SampleSet s = sample(q, p);
  o.require(s.samples.size() == 700, "pool not filled to the 700 cap");
  std::set<SolutionVector> seen;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    o.require(seen.insert(s.samples[i].bits).second, "duplicate sample");
    o.require(energies_close(s.samples[i].energy, oracle::naive_energy(q, s.samples[i].bits)), "stale energy");
    if (i) o.require(sample_less(s.samples[i - 1], s.samples[i]), "samples not sorted");
  }
  for (std::size_t i = 1; i < s.best_energy_trace.size(); ++i) {
    o.require(s.best_energy_trace[i].energy < s.best_energy_trace[i - 1].energy, "trace not decreasing");
    o.require(s.best_energy_trace[i].time >= s.best_energy_trace[i - 1].time, "trace time not monotone");
  }
  o.require(!s.best_energy_trace.empty() && s.best_energy_trace.back().energy == s.best().energy,
            "trace does not end at best");
  o.require(s.first_found_time <= s.end_time && s.end_time <= p.time_limit + 1.0, "timing window");
  if (o.pass) o.detail = fmt("5 repeats, selected %.0f, pool %.0f", double(r.selected_repeat), double(s.samples.size()));
  return o;
}

Verdict analytics_check() {
  Verdict o;
  std::mt19937_64 rng(19);

  // Histogram mass and elite semantics.
  SampleSet s;
  const std::vector<double> energies{-10.0, -10.0 + 5e-6, -10.0 + 2e-5, -9.0, -10.0 + 1e-5};
  for (std::size_t i = 0; i < energies.size(); ++i) s.samples.push_back({oracle::bits_of(i * 37 + 1, 12), energies[i], 0.0});
  std::sort(s.samples.begin(), s.samples.end(), sample_less);
  const EliteSet e = elite_filter(s, 1e-6);
  // window 1e-6 * 10 = 1e-5: -10, -10+5e-6, -10+1e-5
  o.require(e.size() == 3, "elite window size");
  for (int k : {1, 2, 5, 17, 60}) {
    std::vector<SolutionVector> sols;
    for (int i = 0; i < k; ++i) sols.push_back(oracle::random_bits(50, rng));
    const DistanceMatrix m = distance_matrix(sols);
    const auto h = pair_histogram(m);
    std::uint64_t mass = 0;
    for (const auto& [d, c] : h) mass += c;
    o.require(mass == static_cast<std::uint64_t>(k) * (k - 1) / 2, "histogram mass");
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) o.require(m.at(a, b) == oracle::naive_hamming(sols[a], sols[b]), "hamming");
    }
    if (k >= 2) {
      for (Linkage l : {Linkage::single, Linkage::average, Linkage::complete}) {
        const Dendrogram d = hierarchical_cluster(m, l);
        o.require(d.merges.size() == static_cast<std::size_t>(k - 1), "merge count");
        for (std::size_t i = 1; i < d.merges.size(); ++i) {
          o.require(d.merges[i].height >= d.merges[i - 1].height, "heights not monotone");
        }
      }
    }
  }

  // Permutation equivariance: relabelled inputs give the same clusters and heights.
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 2 + rng() % 18;
    DistanceMatrix m(k, 1u << 31);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) m.set(a, b, static_cast<std::uint32_t>(1 + rng() % (1u << 30)));
    }
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DistanceMatrix pm(k, m.num_variables());
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) pm.set(perm[a], perm[b], m.at(a, b));
    }
    for (Linkage l : {Linkage::single, Linkage::average, Linkage::complete}) {
      auto cluster_set = [k](const Dendrogram& d, const std::vector<std::size_t>* relabel) {
        std::vector<std::vector<std::size_t>> mem(2 * k - 1);
        for (std::size_t i = 0; i < k; ++i) mem[i] = {relabel ? (*relabel)[i] : i};
        std::set<std::pair<std::vector<std::size_t>, double>> out;
        for (std::size_t s = 0; s < d.merges.size(); ++s) {
          auto& node = mem[k + s];
          node = mem[d.merges[s].cluster_a];
          node.insert(node.end(), mem[d.merges[s].cluster_b].begin(), mem[d.merges[s].cluster_b].end());
          std::sort(node.begin(), node.end());
          out.insert({node, d.merges[s].height});
        }
        return out;
      };
      o.require(cluster_set(hierarchical_cluster(m, l), &perm) == cluster_set(hierarchical_cluster(pm, l), nullptr),
                "dendrogram not equivariant");
    }
  }

  // Two blobs 360 apart, within-blob distance at most 2.
  const std::size_t n = 1000;
  SolutionVector c1 = oracle::random_bits(n, rng), c2 = c1;
  for (std::size_t i = 0; i < 360; ++i) c2[i] ^= 1u;
  std::vector<SolutionVector> sols;
  for (int blob = 0; blob < 2; ++blob) {
    for (int j = 0; j < 20; ++j) {
      SolutionVector x = blob ? c2 : c1;
      x[500 + rng() % 500] ^= 1u;
      sols.push_back(x);
    }
  }
  const Dendrogram d = hierarchical_cluster(distance_matrix(sols), Linkage::single);
  const double top = d.merges.back().height;
  o.require(top >= 350.0, "final merge below 350");
  o.require(d.merges[d.merges.size() - 2].height <= 2.0, "within-blob merge above 2");
  if (o.pass) o.detail = fmt("two-blob final merge %.0f", top);
  return o;
}

Verdict determinism_check() {
  Verdict o;
  std::mt19937_64 rng(23);
  const QuboInstance q = oracle::random_qubo(80, 0.15, rng);
  SamplerParams p;
  p.seed = 4242;
  p.num_starts = 1;
  p.max_moves = 30000;
  p.time_limit = 600;
  const SampleSet a = sample(q, p), b = sample(q, p);
  o.require(a.samples.size() == b.samples.size(), "sizes differ");
  for (std::size_t i = 0; o.pass && i < a.samples.size(); ++i) {
    o.require(a.samples[i].bits == b.samples[i].bits, "bits differ");
    o.require(a.samples[i].energy == b.samples[i].energy, "energies differ");
  }
  if (o.pass) o.detail = std::to_string(a.samples.size()) + " samples identical";
  return o;
}

Verdict service_check() {
  Verdict o;
  const fs::path dir = fs::temp_directory_path() / "qready-acceptance-service";
  fs::remove_all(dir);
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.data_dir = dir;
  cfg.default_time_limit = 0.3;
  const std::string toy = "2 3\n1 1 1\n1 2 -2\n2 2 1\n";

  auto poll = [&](httplib::Client& c, const std::string& id, std::vector<std::string>* states) {
    for (int i = 0; i < 1000; ++i) {
      auto r = c.Get("/v1/jobs/" + id);
      if (!r || r->status != 200) return std::string("error");
      const std::string st = json::parse(r->body)["state"];
      if (states) states->push_back(st);
      if (st == "completed" || st == "failed") return st;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return std::string("timeout");
  };
  auto rank = [](const std::string& s) { return s == "queued" ? 0 : s == "running" ? 1 : 2; };

  std::string id, id2;
  {
    Service svc(cfg);
    svc.start();
    httplib::Client c("127.0.0.1", svc.port());
    auto r = c.Post("/v1/jobs", json{{"instance", toy}}.dump(), "application/json");
    o.require(r && r->status == 202, "submit did not return 202");
    if (!o.pass) return o;
    id = json::parse(r->body)["job_id"];
    r = c.Post("/v1/jobs", json{{"instance", toy}}.dump(), "application/json");
    id2 = json::parse(r->body)["job_id"];
    r = c.Get("/v1/jobs/" + id2 + "/results");
    o.require(r && r->status == 409, "results before completion not 409");

    std::vector<std::string> states;
    o.require(poll(c, id, &states) == "completed", "toy job did not complete");
    for (std::size_t i = 1; i < states.size(); ++i) o.require(rank(states[i]) >= rank(states[i - 1]), "state regressed");
    r = c.Get("/v1/jobs/" + id + "/results");
    o.require(r && r->status == 200, "results not 200");
    const json res = json::parse(r->body);
    o.require(res["best_energy"] == 0.0, "toy best energy not 0");
    o.require(res["samples"].size() >= 2 && res["samples"][0]["bits"] == "00" && res["samples"][1]["bits"] == "11",
              "toy optima missing");

    r = c.Post("/v1/jobs", "2 2\n1 2 1", "text/plain");
    o.require(r && r->status == 400 &&
                  json::parse(r->body)["error"].get<std::string>().find("declared 2 entries, found 1") != std::string::npos,
              "count mismatch not a 400 with the parser message");
    r = c.Post("/v1/jobs", json{{"catalog", "g999999"}}.dump(), "application/json");
    o.require(r && r->status == 404, "unknown catalog not 404");
    r = c.Get("/v1/jobs/00000000000000000000000000000000");
    o.require(r && r->status == 404, "unknown job not 404");
    o.require(poll(c, id2, nullptr) == "completed", "second job did not complete");
  }
  {
    Service svc(cfg);
    svc.start();
    httplib::Client c("127.0.0.1", svc.port());
    auto r = c.Get("/v1/jobs/" + id + "/results");
    o.require(r && r->status == 200 && json::parse(r->body)["best_energy"] == 0.0, "result lost across restart");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "lifecycle, 400/404/409, restart";
  return o;
}

Verdict mqlib_check(const fs::path& file) {
  Verdict o;
  const QuboInstance q = load_instance(file, InstanceFormat::maxcut_triplets);
  SamplerParams p;
  p.time_limit = 60;
  p.seed = 1;
  const SampleSet s = sample(q, p);
  o.require(std::isfinite(s.best().energy), "best energy not finite");
  const AnalyticsBundle b = analyze(s);
  o.require(b.elite.size() >= 1, "no elite solution");
  o.require(b.dendrogram.merges.size() + 1 == b.elite.size(), "dendrogram shape");
  std::uint64_t mass = 0;
  for (const auto& [d, c] : b.histogram) mass += c;
  o.require(mass == b.elite.size() * (b.elite.size() - 1) / 2, "histogram mass");
  if (o.pass) o.detail = fmt("best cut %.0f, elite %.0f", -s.best().energy, double(b.elite.size()));
  return o;
}

}  // namespace

int main() {
  run("density", 1.0, density_check);
  run("oracle-optimality", 120.0, oracle_check);
  run("delta-consistency", 10.0, delta_check);
  run("clamp-identity", 30.0, clamp_check);
  run("maxcut-oracle", 60.0, maxcut_check);
  run("protocol-semantics", 60.0, protocol_check);
  run("analytics", 30.0, analytics_check);
  run("determinism", 60.0, determinism_check);
  run("service-lifecycle", 30.0, service_check);

  const char* mq = std::getenv("QREADY_MQLIB_DIR");
  std::optional<fs::path> file;
  if (mq) file = locate_instance_file(mq, "g000989");
  if (file) {
    run("mqlib-g000989", 120.0, [&] { return mqlib_check(*file); });
  } else {
    skip("mqlib-g000989", "set QREADY_MQLIB_DIR to a directory holding g000989");
  }

  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
