#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qready/analytics.hpp"
#include "qready/instance_io.hpp"
#include "qready/sampler.hpp"

namespace qready {

enum class SortKey { relative_delta_energy, problem_size, problem_density };

const char* to_string(SortKey k);
SortKey sort_key_from_string(const std::string& s);

/// Win: sampler beat the best-known energy, tie: equal within 1e-14
/// relative, loss: best-known was lower, unknown: no reference available.
enum class Outcome { win, tie, loss, unknown };

const char* to_string(Outcome o);

struct BenchConfig {
  /// Instance file paths, or catalog names resolved against instances_dir.
  std::vector<std::string> instances;
  std::vector<CatalogEntry> catalog;
  std::filesystem::path instances_dir;
  InstanceFormat format = InstanceFormat::qubo_triplets;
  Sense qubo_sense = Sense::minimize;

  SamplerParams sampler;  // time_limit, max_samples, seed and engine knobs
  std::size_t repeats = 5;
  SortKey sort_key = SortKey::relative_delta_energy;
  std::filesystem::path output_dir;  // empty = do not persist anything

  bool decompose = false;
  std::size_t subsize = 64;
  double elite_tolerance = 1e-6;
  Linkage linkage = Linkage::average;
  bool concurrent_instances = false;

  void validate() const;
};

struct RepeatResult {
  std::uint64_t seed = 0;
  double best_energy = 0.0;
  SolutionVector best_bits;
  double first_found_time = 0.0;
  double end_time = 0.0;
  std::size_t num_samples = 0;
  std::size_t elite_count = 0;
};

struct InstanceResult {
  std::string name;
  std::size_t num_variables = 0;
  std::size_t num_nonzeros = 0;  // off-diagonal entries
  double density = 0.0;
  std::optional<double> best_known_energy;  // minimization convention
  std::vector<RepeatResult> repeats;
  std::size_t selected_repeat = 0;
  std::optional<double> relative_delta_energy;
  bool delta_is_absolute = false;  // reference was 0, delta not normalised
  Outcome outcome = Outcome::unknown;
  std::string error;  // non-empty when the instance failed

  bool ok() const { return error.empty(); }
  const RepeatResult& selected() const { return repeats.at(selected_repeat); }
};

struct BenchReport {
  std::vector<InstanceResult> instances;
  std::size_t failures() const;
};

/// argmin of best_energy over repeats; ties go to the lowest index.
std::size_t select_repeat(const std::vector<RepeatResult>& repeats);

struct Classification {
  std::optional<double> relative_delta_energy;
  bool delta_is_absolute = false;
  Outcome outcome = Outcome::unknown;
};

/// Compares the achieved best (minimization) against the reference.
Classification classify(std::optional<double> reference, double achieved);

/// Per-repeat seed: seed XOR repeat index.
inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) { return seed ^ repeat; }

using ProgressFn = std::function<void(const std::string&)>;

/// Runs every instance `repeats` times. Failing instances are recorded with
/// their error message and the run continues. When output_dir is set, raw
/// sample sets go to <out>/<name>/repeat-<r>.json and diversity artifacts of
/// the selected repeat to <out>/<name>/diversity/.
BenchReport run_benchmark(const BenchConfig& cfg, const ProgressFn& progress = {});

/// Evaluates one already-parsed instance; used by run_benchmark and `solve`.
InstanceResult evaluate_instance(const std::string& name, const QuboInstance& q,
                                 std::optional<double> best_known, const BenchConfig& cfg,
                                 const ProgressFn& progress = {});

/// Row order for a sort key; ties (and missing deltas, which sort last) by name.
std::vector<std::size_t> sorted_order(const BenchReport& r, SortKey key);

std::string report_csv(const BenchReport& r, SortKey key);
nlohmann::json report_json(const BenchReport& r, SortKey key);

/// Vertical position in [-1, 1] on the symmetric log axis; 0 for ties.
/// Magnitudes at or below `floor` map to the smallest visible offset.
double symlog_position(double rde, double max_magnitude, double floor = 1e-14);

std::string render_rde_svg(const BenchReport& r, SortKey key);
std::string render_time_svg(const BenchReport& r, SortKey key);
std::string render_elite_svg(const BenchReport& r, SortKey key);

/// Writes report.csv and report.json in `key` order, rde-by-<k>.svg for all
/// three sort keys, time-markers.svg and elite-counts.svg. Byte-identical
/// for identical reports.
void emit_report(const BenchReport& r, SortKey key, const std::filesystem::path& dir);

}  // namespace qready
