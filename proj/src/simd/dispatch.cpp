#include <cstdlib>
#include <string_view>

#include "qready/simd/kernels.hpp"

namespace qready::simd {

namespace {

struct Table {
  Isa isa;
  ScanMovesFn scan_moves;
  HammingWordsFn hamming_words;
};

constexpr Table kScalar{Isa::scalar, &scalar::scan_moves, &scalar::hamming_words};
#if defined(QREADY_HAVE_AVX2)
constexpr Table kAvx2{Isa::avx2, &avx2::scan_moves, &avx2::hamming_words};
#endif

bool cpu_has_avx2() {
#if defined(QREADY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

Table initial_table() {
  if (const char* env = std::getenv("QREADY_SIMD"); env && std::string_view(env) == "scalar") {
    return kScalar;
  }
#if defined(QREADY_HAVE_AVX2)
  if (cpu_has_avx2()) return kAvx2;
#endif
  return kScalar;
}

Table& table() {
  static Table t = initial_table();
  return t;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa active_isa() { return table().isa; }

bool set_isa(Isa isa) {
  if (!isa_available(isa)) return false;
#if defined(QREADY_HAVE_AVX2)
  table() = isa == Isa::avx2 ? kAvx2 : kScalar;
#else
  table() = kScalar;
#endif
  return true;
}

MoveScan scan_moves(std::span<const double> deltas, std::span<const std::int64_t> tabu_until,
                    std::int64_t move) {
  return table().scan_moves(deltas, tabu_until, move);
}

std::uint64_t hamming_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  return table().hamming_words(a, b);
}

}  // namespace qready::simd
