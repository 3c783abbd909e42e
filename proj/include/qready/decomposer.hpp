#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qready/qubo.hpp"
#include "qready/sampler.hpp"

namespace qready {

/// Subset S of an instance with everything outside S clamped to an incumbent.
/// For every assignment y of S:
///   energy(sub_q, y) + offset == energy(q, x with positions S overwritten by y)
struct SubProblem {
  std::vector<std::uint32_t> variables;
  QuboInstance sub_q;
  double offset = 0.0;
};

/// Pluggable solver for subproblems. A remote quantum sampler would implement
/// this same interface.
class InnerSampler {
 public:
  virtual ~InnerSampler() = default;
  virtual SampleSet solve(const QuboInstance& sub_q, double budget_seconds) = 0;
  /// Largest subproblem this sampler accepts.
  virtual std::size_t capacity() const = 0;
  virtual std::string name() const = 0;
};

/// Wraps the tabu engine with a single worker and a move budget
/// proportional to the subproblem size.
class TabuInnerSampler final : public InnerSampler {
 public:
  explicit TabuInnerSampler(std::uint64_t seed = 0, std::size_t max_samples = 8,
                            std::uint64_t moves_per_variable = 200);
  SampleSet solve(const QuboInstance& sub_q, double budget_seconds) override;
  std::size_t capacity() const override { return 1u << 20; }
  std::string name() const override { return "tabu"; }

 private:
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  std::size_t max_samples_;
  std::uint64_t moves_per_variable_;
};

/// Enumerates all 2^k assignments in Gray-code order. Capacity 20.
class ExhaustiveInnerSampler final : public InnerSampler {
 public:
  explicit ExhaustiveInnerSampler(std::size_t max_samples = 8) : max_samples_(max_samples) {}
  SampleSet solve(const QuboInstance& sub_q, double budget_seconds) override;
  std::size_t capacity() const override { return 20; }
  std::string name() const override { return "exhaustive"; }

 private:
  std::size_t max_samples_;
};

/// Raised when the inner sampler fails; carries the outer iteration.
class InnerSamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ModelError on an empty subset, duplicates or out-of-range indices.
SubProblem clamp_subproblem(const QuboInstance& q, std::span<const std::uint8_t> x,
                            std::span<const std::uint32_t> subset);

/// ceil(k/2) variables with the largest |flip_delta| (ties to lower index),
/// then floor(k/2) distinct others drawn uniformly. Result is sorted.
std::vector<std::uint32_t> select_subset(const QuboInstance& q, std::span<const std::uint8_t> x,
                                         std::size_t k, std::mt19937_64& rng);

struct DecomposeOptions {
  std::size_t subsize = 64;
  /// Seed the incumbent with one full-size tabu walk before decomposing.
  bool initial_tabu_pass = true;
  /// Per inner call time budget in seconds (clipped to the remaining time).
  double inner_budget = 0.5;
};

struct DecomposeStats {
  std::size_t outer_iterations = 0;
  std::size_t adoptions = 0;
  std::vector<double> incumbent_history;  // incumbent energy after each iteration
};

/// Outer decomposition loop; returns a pool with the same contracts as sample().
/// A non-zero p.max_moves caps the number of outer iterations.
SampleSet solve_large(const QuboInstance& q, const SamplerParams& p, InnerSampler& inner,
                      const DecomposeOptions& opts = {}, DecomposeStats* stats = nullptr);

}  // namespace qready
