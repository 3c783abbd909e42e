#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include "qready/qubo.hpp"
#include "qready/sampler.hpp"

namespace qready {

/// Binary min-heap over variable indices keyed by (delta, index), with
/// position tracking so keys can change in place.
class IndexedDeltaHeap {
 public:
  IndexedDeltaHeap() = default;
  IndexedDeltaHeap(std::size_t n, const std::vector<double>* keys);

  bool empty() const { return heap_.empty(); }
  bool contains(std::uint32_t v) const { return pos_[v] != kAbsent; }
  std::uint32_t top() const { return heap_.front(); }
  std::size_t size() const { return heap_.size(); }

  void push(std::uint32_t v);
  void erase(std::uint32_t v);
  /// Restores heap order after keys[v] changed.
  void update(std::uint32_t v);

 private:
  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

  bool less(std::uint32_t a, std::uint32_t b) const {
    const double ka = (*keys_)[a], kb = (*keys_)[b];
    return ka < kb || (ka == kb && a < b);
  }
  void place(std::size_t slot, std::uint32_t v) {
    heap_[slot] = v;
    pos_[v] = static_cast<std::uint32_t>(slot);
  }
  void sift_up(std::size_t slot);
  void sift_down(std::size_t slot);

  const std::vector<double>* keys_ = nullptr;
  std::vector<std::uint32_t> heap_;
  std::vector<std::uint32_t> pos_;
};

/// Single-flip tabu walker over one instance. Keeps, at every step boundary,
/// delta_cache[i] == flip_delta(q, current, i).
class TabuSearch {
 public:
  struct Step {
    std::size_t variable = 0;
    double delta = 0.0;
    bool from_local_minimum = false;  // no improving flip existed before the move
    bool aspiration = false;          // a tabu variable was taken
    bool improved_incumbent = false;
  };

  TabuSearch(const QuboInstance& q, std::size_t tenure, bool use_heap, std::uint64_t seed);
  TabuSearch(const TabuSearch&) = delete;
  TabuSearch& operator=(const TabuSearch&) = delete;

  /// Fresh uniform random assignment; clears tabu state and the incumbent.
  void randomize();
  /// Starts from x; clears tabu state and the incumbent.
  void reset(std::span<const std::uint8_t> x);

  /// Index the next step would flip given the aspiration level.
  std::size_t select_move(double aspiration_energy) const;

  /// Selects, applies and marks tabu one move.
  Step step(double aspiration_energy) {
    return step(aspiration_energy, [](const SolutionVector&, double) {});
  }

  /// As step(), calling on_local_minimum(current, energy) before the flip
  /// when no improving move exists.
  template <typename F>
  Step step(double aspiration_energy, F&& on_local_minimum) {
    const Choice c = choose(aspiration_energy);
    if (c.local_min) on_local_minimum(x_, energy_);
    return apply(c);
  }

  /// Applies a flip and updates caches; no tabu bookkeeping.
  void flip(std::size_t i);

  const SolutionVector& current() const { return x_; }
  double current_energy() const { return energy_; }
  std::span<const double> delta_cache() const { return delta_; }
  std::span<const std::int64_t> tabu_until() const { return tabu_until_; }
  std::int64_t move_counter() const { return move_; }
  const SolutionVector& incumbent() const { return best_x_; }
  double incumbent_energy() const { return best_energy_; }
  bool uses_heap() const { return use_heap_; }

  /// Marks variable i tabu until move counter `until` (for tests).
  void set_tabu(std::size_t i, std::int64_t until);

 private:
  struct Choice {
    std::size_t variable;
    bool local_min;
    bool aspiration;
  };
  Choice choose(double aspiration_energy) const;
  Step apply(const Choice& c);
  void rebuild();
  void expire_heap_entries();
  void reheap(std::uint32_t v);
  std::int64_t draw_tenure();

  const QuboInstance& q_;
  std::size_t tenure_;
  bool use_heap_;
  std::mt19937_64 rng_;

  SolutionVector x_;
  double energy_ = 0.0;
  std::vector<double> delta_;
  std::vector<std::int64_t> tabu_until_;
  std::int64_t move_ = 0;
  SolutionVector best_x_;
  double best_energy_ = std::numeric_limits<double>::infinity();

  IndexedDeltaHeap free_;
  IndexedDeltaHeap tabu_;
  using Expiry = std::pair<std::int64_t, std::uint32_t>;
  std::priority_queue<Expiry, std::vector<Expiry>, std::greater<>> expiry_;
};

}  // namespace qready
