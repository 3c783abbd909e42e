#include "qready/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "qready/tabu.hpp"

namespace qready {

namespace {

std::string pack_key(std::span<const std::uint8_t> bits) {
  std::string key((bits.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) key[i / 8] = static_cast<char>(key[i / 8] | (1 << (i % 8)));
  }
  return key;
}

bool ranks_before(double energy, std::span<const std::uint8_t> bits, const Sample& s) {
  if (energy != s.energy) return energy < s.energy;
  return std::lexicographical_compare(bits.begin(), bits.end(), s.bits.begin(), s.bits.end());
}

}  // namespace

const char* to_string(QualityBias b) { return b == QualityBias::quality ? "quality" : "speed"; }

QualityBias quality_bias_from_string(const std::string& s) {
  if (s == "quality") return QualityBias::quality;
  if (s == "speed") return QualityBias::speed;
  throw std::invalid_argument("unknown quality_bias '" + s + "'");
}

void SamplerParams::validate() const {
  if (!(time_limit > 0.0) || !std::isfinite(time_limit)) {
    throw std::invalid_argument("time_limit must be positive");
  }
  if (max_samples < 1) throw std::invalid_argument("max_samples must be at least 1");
  if (!(no_progress_fraction > 0.0 && no_progress_fraction <= 1.0)) {
    throw std::invalid_argument("no_progress_fraction must be in (0, 1]");
  }
}

std::size_t SamplerParams::resolved_num_starts() const {
  if (num_starts > 0) return num_starts;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t SamplerParams::resolved_tenure(std::size_t n) const {
  if (n <= 1) return 0;
  std::size_t t = tabu_tenure;
  if (t == 0) {
    t = std::max<std::size_t>(10, n / 20);
    // Small instances would otherwise spend most moves with every variable tabu.
    t = std::min(t, std::max<std::size_t>(1, n / 4));
  }
  return std::min(t, n - 1);
}

std::size_t SamplerParams::resolved_stagnation(std::size_t n) const {
  if (stagnation_restart > 0) return stagnation_restart;
  return std::max<std::size_t>(5000, 10 * n);
}

bool sample_less(const Sample& a, const Sample& b) { return ranks_before(a.energy, a.bits, b); }

SamplePool::SamplePool(const QuboInstance& q, std::size_t capacity, Clock::time_point start)
    : q_(q), capacity_(capacity), start_(start) {}

double SamplePool::elapsed() const {
  return std::chrono::duration<double>(Clock::now() - start_).count();
}

std::size_t SamplePool::size() const {
  std::lock_guard lock(mu_);
  return samples_.size();
}

bool SamplePool::offer(std::span<const std::uint8_t> bits) {
  if (bits.size() != q_.num_variables()) throw DimensionError("pool: sample length mismatch");
  {
    std::string key = pack_key(bits);
    std::lock_guard lock(mu_);
    if (keys_.count(key)) return false;
  }
  return offer(bits, energy(q_, bits));
}

bool SamplePool::offer(std::span<const std::uint8_t> bits, double exact_energy) {
  if (bits.size() != q_.num_variables()) throw DimensionError("pool: sample length mismatch");
  std::string key = pack_key(bits);
  std::lock_guard lock(mu_);
  if (keys_.count(key)) return false;
  if (samples_.size() >= capacity_ && !ranks_before(exact_energy, bits, *samples_.rbegin())) {
    return false;
  }
  const double now = elapsed();
  samples_.insert(Sample{SolutionVector(bits.begin(), bits.end()), exact_energy, now});
  keys_.insert(std::move(key));
  if (samples_.size() > capacity_) {
    auto last = std::prev(samples_.end());
    keys_.erase(pack_key(last->bits));
    samples_.erase(last);
  }
  if (samples_.size() >= capacity_) {
    threshold_.store(samples_.rbegin()->energy, std::memory_order_relaxed);
  }
  if (exact_energy < best_.load(std::memory_order_relaxed)) {
    best_.store(exact_energy, std::memory_order_relaxed);
    last_improvement_.store(now, std::memory_order_relaxed);
    trace_.push_back({now, exact_energy});
  }
  return true;
}

SampleSet SamplePool::snapshot(double end_time) const {
  std::lock_guard lock(mu_);
  SampleSet out;
  out.samples.assign(samples_.begin(), samples_.end());
  out.best_energy_trace = trace_;
  out.first_found_time = trace_.empty() ? 0.0 : trace_.back().time;
  out.end_time = std::max(end_time, out.first_found_time);
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void run_single_start(const QuboInstance& q, const SamplerParams& p, std::uint64_t start_seed,
                      SamplePool& pool, const std::atomic<bool>& cancel) {
  const std::size_t n = q.num_variables();
  const bool use_heap =
      p.selection == MoveSelection::heap ||
      (p.selection == MoveSelection::automatic && n >= 64 && q.off_diagonal_density() < 0.01);
  const std::uint64_t stagnation = p.resolved_stagnation(n);
  const double no_progress_window = p.no_progress_fraction * p.time_limit;

  TabuSearch ts(q, p.resolved_tenure(n), use_heap, start_seed);
  ts.randomize();

  auto offer_if_admissible = [&pool](const SolutionVector& x, double e) {
    if (e <= pool.admission_threshold()) pool.offer(x);
  };
  offer_if_admissible(ts.current(), ts.current_energy());

  constexpr int kCheckInterval = 64;
  double global_best = pool.best_energy();
  std::uint64_t moves = 0;
  std::uint64_t since_improvement = 0;

  for (;;) {
    for (int k = 0; k < kCheckInterval; ++k) {
      if (p.max_moves && moves >= p.max_moves) break;
      const double aspiration = std::min(global_best, ts.incumbent_energy());
      const auto step = ts.step(aspiration, offer_if_admissible);
      ++moves;
      if (step.improved_incumbent) {
        since_improvement = 0;
        offer_if_admissible(ts.current(), ts.current_energy());
      } else if (++since_improvement >= stagnation) {
        ts.randomize();
        since_improvement = 0;
      }
    }
    if (p.max_moves && moves >= p.max_moves) break;
    if (cancel.load(std::memory_order_relaxed)) break;
    const double now = pool.elapsed();
    if (now >= p.time_limit) break;
    if (p.quality_bias == QualityBias::speed && now - pool.last_improvement() >= no_progress_window) {
      break;
    }
    global_best = pool.best_energy();
  }
  // The walk may end mid-descent; its incumbent is still a valid sample.
  offer_if_admissible(ts.incumbent(), ts.incumbent_energy());
}

SampleSet sample(const QuboInstance& q, const SamplerParams& p) {
  const std::atomic<bool> never{false};
  return sample(q, p, never);
}

SampleSet sample(const QuboInstance& q, const SamplerParams& p, const std::atomic<bool>& cancel) {
  p.validate();
  if (q.num_variables() == 0) throw std::invalid_argument("instance has no variables");

  const auto start = SamplePool::Clock::now();
  SamplePool pool(q, p.max_samples, start);
  const std::size_t workers = p.resolved_num_starts();

  if (workers == 1) {
    run_single_start(q, p, derive_seed(p.seed, 0), pool, cancel);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] { run_single_start(q, p, derive_seed(p.seed, w), pool, cancel); });
    }
  }
  return pool.snapshot(pool.elapsed());
}

}  // namespace qready
