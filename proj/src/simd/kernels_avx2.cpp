// Compiled with -mavx2 -mpopcnt; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>
#include <limits>

#include "qready/simd/kernels.hpp"

namespace qready::simd::avx2 {

namespace {

struct LaneBest {
  double value;
  std::size_t index;
};

inline bool better(double v, std::size_t i, const LaneBest& cur) {
  return v < cur.value || (v == cur.value && i < cur.index);
}

// Lanes hold the first occurrence of their own minimum, so the cross-lane
// reduction only has to break value ties by index.
inline LaneBest reduce(__m256d values, __m256i indices) {
  alignas(32) double v[4];
  alignas(32) std::int64_t idx[4];
  _mm256_store_pd(v, values);
  _mm256_store_si256(reinterpret_cast<__m256i*>(idx), indices);
  LaneBest best{std::numeric_limits<double>::infinity(), npos};
  for (int lane = 0; lane < 4; ++lane) {
    const auto i = static_cast<std::size_t>(idx[lane]);
    if (i != npos && better(v[lane], i, best)) best = {v[lane], i};
  }
  return best;
}

}  // namespace

MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move) {
  const std::size_t n = deltas.size();
  const double* d = deltas.data();
  const std::int64_t* t = tabu_until.data();

  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256i move_v = _mm256_set1_epi64x(move);
  const __m256i step = _mm256_set1_epi64x(4);
  __m256i cur_idx = _mm256_setr_epi64x(0, 1, 2, 3);

  __m256d min_any = inf;
  __m256d min_allowed = inf;
  __m256i idx_any = _mm256_set1_epi64x(-1);
  __m256i idx_allowed = _mm256_set1_epi64x(-1);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dv = _mm256_loadu_pd(d + i);
    const __m256i tv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(t + i));

    const __m256d lt_any = _mm256_cmp_pd(dv, min_any, _CMP_LT_OQ);
    min_any = _mm256_blendv_pd(min_any, dv, lt_any);
    idx_any = _mm256_castpd_si256(_mm256_blendv_pd(
        _mm256_castsi256_pd(idx_any), _mm256_castsi256_pd(cur_idx), lt_any));

    const __m256d tabu = _mm256_castsi256_pd(_mm256_cmpgt_epi64(tv, move_v));
    const __m256d cand = _mm256_blendv_pd(dv, inf, tabu);
    const __m256d lt_allowed = _mm256_cmp_pd(cand, min_allowed, _CMP_LT_OQ);
    min_allowed = _mm256_blendv_pd(min_allowed, cand, lt_allowed);
    idx_allowed = _mm256_castpd_si256(_mm256_blendv_pd(
        _mm256_castsi256_pd(idx_allowed), _mm256_castsi256_pd(cur_idx), lt_allowed));

    cur_idx = _mm256_add_epi64(cur_idx, step);
  }

  LaneBest any = reduce(min_any, idx_any);
  LaneBest allowed = reduce(min_allowed, idx_allowed);
  for (; i < n; ++i) {
    if (d[i] < any.value) any = {d[i], i};
    if (t[i] <= move && d[i] < allowed.value) allowed = {d[i], i};
  }

  MoveScan r;
  r.best_any = any.index;
  r.best_any_delta = any.value;
  r.best_allowed = allowed.index;
  r.best_allowed_delta = allowed.value;
  return r;
}

std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  const std::size_t n = a.size();
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();

  std::size_t w = 0;
  for (; w + 4 <= n; w += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + w));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + w));
    const __m256i x = _mm256_xor_si256(va, vb);
    const __m256i lo = _mm256_and_si256(x, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(x, 4), low_mask);
    const __m256i bytes =
        _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(bytes, _mm256_setzero_si256()));
  }

  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t count = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; w < n; ++w) count += static_cast<std::uint64_t>(_mm_popcnt_u64(a[w] ^ b[w]));
  return count;
}

}  // namespace qready::simd::avx2
