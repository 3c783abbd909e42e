#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qready/qubo.hpp"
#include "qready/sampler.hpp"

namespace qready {

/// Raised by relative_delta_energy when the reference is zero.
class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (reference - candidate) / |reference|, minimization convention: positive
/// means the candidate is better.
double relative_delta_energy(double reference, double candidate);

/// Samples within tolerance * max(1, |best|) of the best energy.
struct EliteSet {
  std::vector<Sample> members;  // energy order, best first
  double reference_energy = 0.0;
  double tolerance = 1e-6;

  std::size_t size() const { return members.size(); }
};

/// Throws std::invalid_argument on an empty set or a tolerance that is not
/// finite and positive.
EliteSet elite_filter(const SampleSet& s, double tolerance = 1e-6, std::size_t cap = 700);

/// Packs 0/1 bytes into little-endian 64-bit words, tail bits zero.
std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits);

/// Throws DimensionError on length mismatch.
std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t k, std::size_t num_variables);

  std::size_t size() const { return k_; }
  std::size_t num_variables() const { return n_; }
  std::uint32_t at(std::size_t a, std::size_t b) const { return d_[a * k_ + b]; }
  void set(std::size_t a, std::size_t b, std::uint32_t v) {
    d_[a * k_ + b] = v;
    d_[b * k_ + a] = v;
  }
  double normalized(std::size_t a, std::size_t b) const {
    return n_ == 0 ? 0.0 : static_cast<double>(at(a, b)) / static_cast<double>(n_);
  }

 private:
  std::size_t k_ = 0;
  std::size_t n_ = 0;
  std::vector<std::uint32_t> d_;
};

DistanceMatrix distance_matrix(std::span<const SolutionVector> solutions);
DistanceMatrix distance_matrix(const EliteSet& e);

/// Hamming distance -> number of unordered pairs at that distance.
using PairHistogram = std::map<std::uint32_t, std::uint64_t>;

PairHistogram pair_histogram(const DistanceMatrix& m);

/// Descriptive shape of a pair histogram (population moments).
struct HistogramStats {
  std::uint64_t pairs = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  std::uint32_t min_distance = 0;
  std::uint32_t max_distance = 0;
};

HistogramStats describe(const PairHistogram& h);

enum class Linkage { single, average, complete };

const char* to_string(Linkage l);
Linkage linkage_from_string(const std::string& s);

/// Leaves are clusters 0..k-1; merge i creates cluster k+i.
struct Merge {
  std::size_t cluster_a = 0;  // smaller id, drawn on the left
  std::size_t cluster_b = 0;
  double height = 0.0;
  std::size_t new_size = 0;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<std::size_t> leaf_order;
};

/// Naive O(k^3) agglomerative clustering. Ties between candidate pairs go to
/// the lexicographically smallest (cluster_a, cluster_b).
Dendrogram hierarchical_cluster(const DistanceMatrix& m, Linkage linkage = Linkage::average);

/// Everything the diversity figures need for one sample set.
struct AnalyticsBundle {
  EliteSet elite;
  DistanceMatrix distances;
  PairHistogram histogram;
  HistogramStats stats;
  Dendrogram dendrogram;
  Linkage linkage = Linkage::average;
};

AnalyticsBundle analyze(const SampleSet& s, double tolerance = 1e-6,
                        Linkage linkage = Linkage::average, std::size_t cap = 700);

/// Matrix rows/columns in `order`; header row lists the original indices.
std::string distance_matrix_csv(const DistanceMatrix& m, std::span<const std::size_t> order,
                                bool normalized = false);
std::string histogram_csv(const PairHistogram& h);
nlohmann::json dendrogram_json(const Dendrogram& d, Linkage linkage);
nlohmann::json summary_json(const AnalyticsBundle& b);

/// Distance heatmap in dendrogram order, dendrogram above it, a colorbar with
/// raw and normalized scales, and a pair-histogram inset.
std::string render_diversity_svg(const AnalyticsBundle& b, const std::string& title);

/// Writes distances.csv, distances_normalized.csv, histogram.csv,
/// dendrogram.json, diversity.svg and analytics.json into dir.
void write_analytics(const AnalyticsBundle& b, const std::filesystem::path& dir,
                     const std::string& title);

}  // namespace qready
