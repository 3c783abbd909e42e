#include <bit>

#include "qready/simd/kernels.hpp"

namespace qready::simd::scalar {

MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move) {
  MoveScan r;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    if (d < r.best_any_delta) {
      r.best_any_delta = d;
      r.best_any = i;
    }
    if (tabu_until[i] <= move && d < r.best_allowed_delta) {
      r.best_allowed_delta = d;
      r.best_allowed = i;
    }
  }
  return r;
}

std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::uint64_t count = 0;
  for (std::size_t w = 0; w < a.size(); ++w) count += std::popcount(a[w] ^ b[w]);
  return count;
}

}  // namespace qready::simd::scalar
