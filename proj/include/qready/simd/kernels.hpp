#pragma once

// Data-parallel inner loops of the sampler and the diversity analytics.
//
// Every kernel has a portable scalar reference in qready::simd::scalar and,
// where the target supports it, an intrinsics variant (qready::simd::avx2).
// The free functions in qready::simd dispatch to the best variant detected at
// runtime; QREADY_SIMD=scalar in the environment pins the reference path.
// Variants must return bit-identical results, including tie-breaking.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace qready::simd {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Result of one pass over the flip-delta cache.
struct MoveScan {
  std::size_t best_allowed = npos;  // argmin over non-tabu variables
  double best_allowed_delta = std::numeric_limits<double>::infinity();
  std::size_t best_any = npos;      // argmin over all variables
  double best_any_delta = std::numeric_limits<double>::infinity();
};

/// Variable i is allowed when tabu_until[i] <= move. Ties resolve to the
/// lowest index. Both spans must have equal length.
using ScanMovesFn = MoveScan (*)(std::span<const double> deltas,
                                 std::span<const std::int64_t> tabu_until,
                                 std::int64_t move);

/// Number of differing bits between two equal-length packed bit strings.
using HammingWordsFn = std::uint64_t (*)(std::span<const std::uint64_t> a,
                                         std::span<const std::uint64_t> b);

namespace scalar {
MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move);
std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
}  // namespace scalar

#if defined(QREADY_HAVE_AVX2)
namespace avx2 {
MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move);
std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
}  // namespace avx2
#endif

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

/// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Currently dispatched variant.
Isa active_isa();

/// Switches dispatch; returns false (and changes nothing) if unavailable.
/// Not synchronized against concurrent kernel calls.
bool set_isa(Isa isa);

MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move);
std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

}  // namespace qready::simd
