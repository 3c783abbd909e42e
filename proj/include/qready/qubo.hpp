#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qready {

/// Thrown when a vector length does not match the instance size.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown on invalid model construction or out-of-range indices.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Sense { minimize, maximize };

const char* to_string(Sense s);
Sense sense_from_string(const std::string& s);

/// Binary assignment. One byte per variable keeps flips and indexing cheap in
/// the sampler; analytics packs these into words when it needs popcounts.
using SolutionVector = std::vector<std::uint8_t>;

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

/// Sparse upper-triangular QUBO, minimization convention:
///   E(x) = sum_{i <= j} Q_ij x_i x_j
///
/// Immutable after construction. Alongside the canonical entry map it keeps a
/// symmetric CSR adjacency (off-diagonal only) and a dense diagonal, which is
/// what the incremental flip-delta evaluation walks.
class QuboInstance {
 public:
  QuboInstance() = default;

  /// Builds from (i, j, w) terms. Pairs with i > j are folded onto (j, i),
  /// repeated pairs are summed and exact zeros dropped.
  QuboInstance(std::size_t num_variables,
               const std::vector<std::pair<IndexPair, double>>& terms,
               Sense sense_of_origin = Sense::minimize);

  /// Same folding rules, from an already keyed map.
  static QuboInstance from_entries(std::size_t num_variables,
                                   const std::map<IndexPair, double>& entries,
                                   Sense sense_of_origin = Sense::minimize);

  std::size_t num_variables() const { return n_; }
  std::size_t num_entries() const { return entries_.size(); }
  /// Number of stored entries with i != j.
  std::size_t num_off_diagonal() const { return num_off_diagonal_; }
  Sense sense_of_origin() const { return sense_; }

  const std::map<IndexPair, double>& entries() const { return entries_; }

  double diagonal(std::size_t i) const { return diag_[i]; }
  std::span<const double> diagonal() const { return diag_; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {adj_index_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  std::span<const double> neighbor_weights(std::size_t i) const {
    return {adj_weight_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  std::size_t degree(std::size_t i) const { return row_start_[i + 1] - row_start_[i]; }

  /// Coefficient for (min(i,j), max(i,j)), zero if absent.
  double coefficient(std::size_t i, std::size_t j) const;

  /// Fraction of the n(n-1)/2 off-diagonal slots that are populated; 0 for n < 2.
  double off_diagonal_density() const;

 private:
  void build(std::map<IndexPair, double> entries);

  std::size_t n_ = 0;
  Sense sense_ = Sense::minimize;
  std::map<IndexPair, double> entries_;
  std::vector<double> diag_;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::uint32_t> adj_index_;
  std::vector<double> adj_weight_;
  std::size_t num_off_diagonal_ = 0;
};

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double weight;
};

/// Undirected weighted graph with u < v on every edge.
class MaxCutGraph {
 public:
  MaxCutGraph(std::size_t num_vertices, std::vector<WeightedEdge> edges);

  std::size_t num_vertices() const { return n_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

 private:
  std::size_t n_;
  std::vector<WeightedEdge> edges_;
};

/// Exact energy. Throws DimensionError when x.size() != n.
double energy(const QuboInstance& q, std::span<const std::uint8_t> x);

/// energy(q, flip(x, i)) - energy(q, x) in O(deg(i)).
double flip_delta(const QuboInstance& q, std::span<const std::uint8_t> x, std::size_t i);

/// nnz / (n(n-1)/2). Throws ModelError for n < 2.
double density(std::size_t n, std::size_t nnz);

/// Total weight of edges crossing the bipartition encoded by x.
double cut_value(const MaxCutGraph& g, std::span<const std::uint8_t> x);

/// Minimization QUBO whose energy is the negated cut value.
QuboInstance from_maxcut(const MaxCutGraph& g);

/// |a - b| <= rel * max(1, |reference|).
bool energies_close(double a, double b, double reference, double rel = 1e-9);
inline bool energies_close(double a, double b) { return energies_close(a, b, b); }

}  // namespace qready
