#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qready/qubo.hpp"

namespace qready {

enum class QualityBias { quality, speed };

const char* to_string(QualityBias b);
QualityBias quality_bias_from_string(const std::string& s);

/// How the tabu walker finds its next move.
///   scan: full pass over the delta cache (SIMD kernel), best for dense rows.
///   heap: indexed heaps over tabu / non-tabu variables, O(deg log n) per move.
///   automatic: heap below 1% off-diagonal density, scan otherwise.
enum class MoveSelection { automatic, scan, heap };

struct SamplerParams {
  double time_limit = 1200.0;       // seconds
  std::size_t max_samples = 700;
  std::uint64_t seed = 0;
  std::size_t num_starts = 0;       // 0 = one per hardware thread
  std::size_t tabu_tenure = 0;      // 0 = max(10, n/20)
  std::size_t stagnation_restart = 0;  // 0 = max(5000, 10n)
  double no_progress_fraction = 0.25;
  QualityBias quality_bias = QualityBias::quality;
  /// Per-worker move budget, 0 = unbounded. Lets callers run a time-independent
  /// (hence reproducible) search.
  std::uint64_t max_moves = 0;
  MoveSelection selection = MoveSelection::automatic;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;

  std::size_t resolved_num_starts() const;
  std::size_t resolved_tenure(std::size_t n) const;
  std::size_t resolved_stagnation(std::size_t n) const;
};

struct Sample {
  SolutionVector bits;
  double energy = 0.0;
  double found_at = 0.0;  // seconds since sampling start
};

struct TracePoint {
  double time = 0.0;
  double energy = 0.0;
};

/// Energy-ordered, bit-deduplicated pool. Ties on energy are ordered by
/// lexicographic bits.
struct SampleSet {
  std::vector<Sample> samples;
  double first_found_time = 0.0;
  double end_time = 0.0;
  std::vector<TracePoint> best_energy_trace;

  bool empty() const { return samples.empty(); }
  const Sample& best() const { return samples.front(); }
};

/// Strict weak order used for SampleSet: energy, then bits.
bool sample_less(const Sample& a, const Sample& b);

/// Bounded best-k pool shared by concurrent workers. The final contents are
/// the best max_samples distinct bit vectors ever offered, independent of
/// offer order; only the timing fields depend on scheduling.
class SamplePool {
 public:
  using Clock = std::chrono::steady_clock;

  SamplePool(const QuboInstance& q, std::size_t capacity, Clock::time_point start);

  /// Recomputes the energy from scratch and inserts if the vector is new and
  /// ranks within capacity. Returns true if inserted.
  bool offer(std::span<const std::uint8_t> bits);
  /// Same, with a known exact energy (skips the recomputation).
  bool offer(std::span<const std::uint8_t> bits, double exact_energy);

  /// Candidates above this energy cannot enter. +inf until the pool is full.
  double admission_threshold() const { return threshold_.load(std::memory_order_relaxed); }
  double best_energy() const { return best_.load(std::memory_order_relaxed); }
  /// Seconds since start of the latest best-energy improvement.
  double last_improvement() const { return last_improvement_.load(std::memory_order_relaxed); }

  double elapsed() const;
  std::size_t size() const;

  SampleSet snapshot(double end_time) const;

 private:
  struct Less {
    bool operator()(const Sample& a, const Sample& b) const { return sample_less(a, b); }
  };

  const QuboInstance& q_;
  std::size_t capacity_;
  Clock::time_point start_;
  mutable std::mutex mu_;
  std::set<Sample, Less> samples_;
  std::unordered_set<std::string> keys_;
  std::vector<TracePoint> trace_;
  std::atomic<double> threshold_{std::numeric_limits<double>::infinity()};
  std::atomic<double> best_{std::numeric_limits<double>::infinity()};
  std::atomic<double> last_improvement_{0.0};
};

/// Multi-start tabu search. Throws std::invalid_argument for n = 0 or bad params.
SampleSet sample(const QuboInstance& q, const SamplerParams& p);
/// Same; workers stop early once `cancel` becomes true.
SampleSet sample(const QuboInstance& q, const SamplerParams& p, const std::atomic<bool>& cancel);

/// One worker: repeated tabu walks from random starts until the stop
/// condition, offering local minima and incumbents to the pool.
void run_single_start(const QuboInstance& q, const SamplerParams& p, std::uint64_t start_seed,
                      SamplePool& pool, const std::atomic<bool>& cancel);

/// Independent per-worker seed stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qready
