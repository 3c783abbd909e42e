#include "qready/tabu.hpp"

#include "qready/simd/kernels.hpp"

namespace qready {

IndexedDeltaHeap::IndexedDeltaHeap(std::size_t n, const std::vector<double>* keys)
    : keys_(keys), pos_(n, kAbsent) {
  heap_.reserve(n);
}

void IndexedDeltaHeap::push(std::uint32_t v) {
  heap_.push_back(v);
  pos_[v] = static_cast<std::uint32_t>(heap_.size() - 1);
  sift_up(heap_.size() - 1);
}

void IndexedDeltaHeap::erase(std::uint32_t v) {
  const std::size_t slot = pos_[v];
  const std::uint32_t last = heap_.back();
  heap_.pop_back();
  pos_[v] = kAbsent;
  if (slot == heap_.size()) return;
  place(slot, last);
  sift_up(slot);
  sift_down(pos_[last]);
}

void IndexedDeltaHeap::update(std::uint32_t v) {
  sift_up(pos_[v]);
  sift_down(pos_[v]);
}

void IndexedDeltaHeap::sift_up(std::size_t slot) {
  const std::uint32_t v = heap_[slot];
  while (slot > 0) {
    const std::size_t parent = (slot - 1) / 2;
    if (!less(v, heap_[parent])) break;
    place(slot, heap_[parent]);
    slot = parent;
  }
  place(slot, v);
}

void IndexedDeltaHeap::sift_down(std::size_t slot) {
  const std::uint32_t v = heap_[slot];
  const std::size_t n = heap_.size();
  for (;;) {
    std::size_t child = 2 * slot + 1;
    if (child >= n) break;
    if (child + 1 < n && less(heap_[child + 1], heap_[child])) ++child;
    if (!less(heap_[child], v)) break;
    place(slot, heap_[child]);
    slot = child;
  }
  place(slot, v);
}

TabuSearch::TabuSearch(const QuboInstance& q, std::size_t tenure, bool use_heap,
                       std::uint64_t seed)
    : q_(q),
      tenure_(tenure),
      use_heap_(use_heap),
      rng_(seed),
      x_(q.num_variables(), 0),
      delta_(q.num_variables(), 0.0),
      tabu_until_(q.num_variables(), 0) {
  if (use_heap_) {
    free_ = IndexedDeltaHeap(q.num_variables(), &delta_);
    tabu_ = IndexedDeltaHeap(q.num_variables(), &delta_);
  }
  rebuild();
}

void TabuSearch::randomize() {
  std::bernoulli_distribution coin(0.5);
  for (auto& b : x_) b = coin(rng_) ? 1 : 0;
  rebuild();
}

void TabuSearch::reset(std::span<const std::uint8_t> x) {
  if (x.size() != x_.size()) throw DimensionError("reset: solution length mismatch");
  x_.assign(x.begin(), x.end());
  rebuild();
}

void TabuSearch::rebuild() {
  const std::size_t n = x_.size();
  for (std::size_t i = 0; i < n; ++i) delta_[i] = flip_delta(q_, x_, i);
  energy_ = energy(q_, x_);
  std::fill(tabu_until_.begin(), tabu_until_.end(), std::int64_t{0});
  move_ = 0;
  best_x_ = x_;
  best_energy_ = energy_;
  if (use_heap_) {
    free_ = IndexedDeltaHeap(n, &delta_);
    tabu_ = IndexedDeltaHeap(n, &delta_);
    expiry_ = {};
    for (std::uint32_t i = 0; i < n; ++i) free_.push(i);
  }
}

void TabuSearch::flip(std::size_t i) {
  const double sign = x_[i] ? -1.0 : 1.0;  // change in x_i
  energy_ += delta_[i];
  x_[i] ^= 1;
  delta_[i] = -delta_[i];
  // keys change one at a time so each heap repair sees an otherwise valid heap
  if (use_heap_) reheap(static_cast<std::uint32_t>(i));
  const auto nbr = q_.neighbors(i);
  const auto w = q_.neighbor_weights(i);
  for (std::size_t k = 0; k < nbr.size(); ++k) {
    const std::uint32_t j = nbr[k];
    delta_[j] += (x_[j] ? -sign : sign) * w[k];
    if (use_heap_) reheap(j);
  }
}

void TabuSearch::reheap(std::uint32_t v) { (free_.contains(v) ? free_ : tabu_).update(v); }

void TabuSearch::set_tabu(std::size_t i, std::int64_t until) {
  tabu_until_[i] = until;
  if (!use_heap_) return;
  const auto v = static_cast<std::uint32_t>(i);
  const bool is_tabu = until > move_;
  if (is_tabu && free_.contains(v)) {
    free_.erase(v);
    tabu_.push(v);
  } else if (!is_tabu && tabu_.contains(v)) {
    tabu_.erase(v);
    free_.push(v);
  }
  if (is_tabu) expiry_.emplace(until, v);
}

std::int64_t TabuSearch::draw_tenure() {
  const auto t = static_cast<std::int64_t>(tenure_);
  const std::int64_t jitter = t / 4;
  if (jitter == 0) return t;
  std::uniform_int_distribution<std::int64_t> dist(-jitter, jitter);
  return t + dist(rng_);
}

TabuSearch::Choice TabuSearch::choose(double aspiration_energy) const {
  std::size_t best_any = simd::npos;
  double best_any_delta = 0.0;
  std::size_t best_allowed = simd::npos;

  if (use_heap_) {
    if (!free_.empty()) {
      best_allowed = free_.top();
      best_any = best_allowed;
    }
    if (!tabu_.empty()) {
      const std::uint32_t t = tabu_.top();
      if (best_any == simd::npos || delta_[t] < delta_[best_any] ||
          (delta_[t] == delta_[best_any] && t < best_any)) {
        best_any = t;
      }
    }
    best_any_delta = delta_[best_any];
  } else {
    const simd::MoveScan scan = simd::scan_moves(delta_, tabu_until_, move_);
    best_any = scan.best_any;
    best_any_delta = scan.best_any_delta;
    best_allowed = scan.best_allowed;
  }

  Choice c{best_any, best_any_delta >= 0.0, false};
  if (best_any != best_allowed) {
    if (best_allowed != simd::npos && !(energy_ + best_any_delta < aspiration_energy)) {
      c.variable = best_allowed;
    } else {
      // Either a tabu move reaches a new global best, or everything is tabu.
      c.aspiration = true;
    }
  }
  return c;
}

std::size_t TabuSearch::select_move(double aspiration_energy) const {
  return choose(aspiration_energy).variable;
}

TabuSearch::Step TabuSearch::apply(const Choice& c) {
  Step s;
  s.variable = c.variable;
  s.delta = delta_[c.variable];
  s.from_local_minimum = c.local_min;
  s.aspiration = c.aspiration;

  flip(c.variable);
  const auto v = static_cast<std::uint32_t>(c.variable);
  const std::int64_t until = move_ + draw_tenure() + 1;
  tabu_until_[v] = until;
  ++move_;

  if (use_heap_) {
    const bool is_tabu = until > move_;
    if (is_tabu) {
      if (free_.contains(v)) {
        free_.erase(v);
        tabu_.push(v);
      }
      expiry_.emplace(until, v);
    } else if (tabu_.contains(v)) {
      tabu_.erase(v);
      free_.push(v);
    }
    expire_heap_entries();
  }

  if (energy_ < best_energy_) {
    best_energy_ = energy_;
    best_x_ = x_;
    s.improved_incumbent = true;
  }
  return s;
}

void TabuSearch::expire_heap_entries() {
  while (!expiry_.empty() && expiry_.top().first <= move_) {
    const auto [until, v] = expiry_.top();
    expiry_.pop();
    if (tabu_until_[v] == until && tabu_.contains(v)) {
      tabu_.erase(v);
      free_.push(v);
    }
  }
}

}  // namespace qready
