#include "qready/decomposer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace qready {

namespace {

constexpr std::uint32_t kOutside = std::numeric_limits<std::uint32_t>::max();

}  // namespace

SubProblem clamp_subproblem(const QuboInstance& q, std::span<const std::uint8_t> x,
                            std::span<const std::uint32_t> subset) {
  const std::size_t n = q.num_variables();
  if (x.size() != n) throw DimensionError("clamp: incumbent length mismatch");
  if (subset.empty()) throw ModelError("clamp: empty subset");

  std::vector<std::uint32_t> pos(n, kOutside);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const std::uint32_t v = subset[k];
    if (v >= n) throw ModelError("clamp: subset index out of range");
    if (pos[v] != kOutside) throw ModelError("clamp: duplicate subset index");
    pos[v] = static_cast<std::uint32_t>(k);
  }

  std::map<IndexPair, double> sub;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const std::uint32_t v = subset[k];
    double linear = q.diagonal(v);
    const auto nbr = q.neighbors(v);
    const auto w = q.neighbor_weights(v);
    for (std::size_t e = 0; e < nbr.size(); ++e) {
      const std::uint32_t j = nbr[e];
      if (pos[j] == kOutside) {
        if (x[j]) linear += w[e];
      } else if (pos[j] > k) {
        sub[{static_cast<std::uint32_t>(k), pos[j]}] += w[e];
      }
    }
    if (linear != 0.0) sub[{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k)}] += linear;
  }

  double offset = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!x[i] || pos[i] != kOutside) continue;
    offset += q.diagonal(i);
    const auto nbr = q.neighbors(i);
    const auto w = q.neighbor_weights(i);
    for (std::size_t e = 0; e < nbr.size(); ++e) {
      const std::uint32_t j = nbr[e];
      if (j > i && x[j] && pos[j] == kOutside) offset += w[e];
    }
  }

  return SubProblem{std::vector<std::uint32_t>(subset.begin(), subset.end()),
                    QuboInstance::from_entries(subset.size(), sub, Sense::minimize), offset};
}

std::vector<std::uint32_t> select_subset(const QuboInstance& q, std::span<const std::uint8_t> x,
                                         std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = q.num_variables();
  if (k < 1 || k > n) throw ModelError("select_subset: k must be in [1, n]");

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (k == n) return order;

  std::vector<double> impact(n);
  for (std::size_t i = 0; i < n; ++i) impact[i] = std::abs(flip_delta(q, x, i));

  const std::size_t top = (k + 1) / 2;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return impact[a] > impact[b] || (impact[a] == impact[b] && a < b);
                    });
  // Partial Fisher-Yates over the remainder for the random half.
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
  for (std::size_t i = top; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

TabuInnerSampler::TabuInnerSampler(std::uint64_t seed, std::size_t max_samples,
                                   std::uint64_t moves_per_variable)
    : seed_(seed), max_samples_(max_samples), moves_per_variable_(moves_per_variable) {}

SampleSet TabuInnerSampler::solve(const QuboInstance& sub_q, double budget_seconds) {
  SamplerParams p;
  p.time_limit = std::max(budget_seconds, 1e-3);
  p.max_samples = max_samples_;
  p.seed = derive_seed(seed_, calls_++);
  p.num_starts = 1;
  p.max_moves = std::max<std::uint64_t>(1000, moves_per_variable_ * sub_q.num_variables());
  p.stagnation_restart = std::max<std::size_t>(100, 10 * sub_q.num_variables());
  return sample(sub_q, p);
}

SampleSet ExhaustiveInnerSampler::solve(const QuboInstance& sub_q, double /*budget_seconds*/) {
  const std::size_t k = sub_q.num_variables();
  if (k == 0 || k > capacity()) {
    throw std::invalid_argument("exhaustive sampler handles 1.." + std::to_string(capacity()) +
                                " variables, got " + std::to_string(k));
  }
  const auto start = SamplePool::Clock::now();
  SamplePool pool(sub_q, max_samples_, start);
  SolutionVector y(k, 0);
  double e = 0.0;
  pool.offer(y, 0.0);
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t g = 1; g < total; ++g) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(g));
    e += flip_delta(sub_q, y, bit);
    y[bit] ^= 1;
    if (e <= pool.admission_threshold() + 1e-9 * std::max(1.0, std::abs(e))) pool.offer(y);
  }
  return pool.snapshot(pool.elapsed());
}

SampleSet solve_large(const QuboInstance& q, const SamplerParams& p, InnerSampler& inner,
                      const DecomposeOptions& opts, DecomposeStats* stats) {
  p.validate();
  const std::size_t n = q.num_variables();
  if (n == 0) throw std::invalid_argument("instance has no variables");
  if (opts.subsize == 0) throw std::invalid_argument("subsize must be positive");

  const auto start = SamplePool::Clock::now();
  SamplePool pool(q, p.max_samples, start);
  std::mt19937_64 rng(derive_seed(p.seed, 0xdec0));

  SolutionVector x(n, 0);
  if (opts.initial_tabu_pass) {
    SamplerParams first = p;
    first.num_starts = 1;
    first.time_limit = std::max(1e-3, 0.1 * p.time_limit);
    first.max_moves = std::max<std::uint64_t>(10000, 20 * n);
    first.quality_bias = QualityBias::speed;
    const SampleSet seeded = sample(q, first);
    for (const auto& s : seeded.samples) pool.offer(s.bits, s.energy);
    x = seeded.best().bits;
  } else {
    std::bernoulli_distribution coin(0.5);
    for (auto& b : x) b = coin(rng) ? 1 : 0;
  }
  double incumbent = energy(q, x);
  pool.offer(x, incumbent);

  const std::size_t k = std::min({opts.subsize, n, inner.capacity()});
  const double no_progress_window = p.no_progress_fraction * p.time_limit;
  SolutionVector candidate(n);

  for (std::size_t iter = 0;; ++iter) {
    if (p.max_moves && iter >= p.max_moves) break;
    const double now = pool.elapsed();
    if (now >= p.time_limit) break;
    if (p.quality_bias == QualityBias::speed && now - pool.last_improvement() >= no_progress_window) {
      break;
    }

    const auto subset = select_subset(q, x, k, rng);
    const SubProblem sub = clamp_subproblem(q, x, subset);
    SampleSet result;
    try {
      result = inner.solve(sub.sub_q, std::min(opts.inner_budget, p.time_limit - now));
    } catch (const std::exception& e) {
      throw InnerSamplerError("inner sampler '" + inner.name() + "' failed at outer iteration " +
                              std::to_string(iter) + ": " + e.what());
    }
    if (result.empty()) {
      throw InnerSamplerError("inner sampler '" + inner.name() + "' returned no samples at outer iteration " +
                              std::to_string(iter));
    }

    bool adopted = false;
    const SolutionVector base = x;
    for (std::size_t r = 0; r < result.samples.size(); ++r) {
      const Sample& s = result.samples[r];
      if (s.bits.size() != subset.size()) {
        throw InnerSamplerError("inner sampler '" + inner.name() + "' returned a sample of wrong length");
      }
      const double approx = s.energy + sub.offset;
      if (r > 0 && approx > pool.admission_threshold()) continue;
      candidate = base;
      for (std::size_t j = 0; j < subset.size(); ++j) candidate[subset[j]] = s.bits[j];
      const double exact = energy(q, candidate);
      pool.offer(candidate, exact);
      if (r == 0 && exact <= incumbent && candidate != base) {
        x = candidate;
        incumbent = exact;
        adopted = true;
      }
    }

    if (stats) {
      ++stats->outer_iterations;
      if (adopted) ++stats->adoptions;
      stats->incumbent_history.push_back(incumbent);
    }
  }
  return pool.snapshot(pool.elapsed());
}

}  // namespace qready
