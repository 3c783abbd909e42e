#include "qready/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qready {

const char* to_string(Sense s) { return s == Sense::minimize ? "minimize" : "maximize"; }

Sense sense_from_string(const std::string& s) {
  if (s == "minimize" || s == "min") return Sense::minimize;
  if (s == "maximize" || s == "max") return Sense::maximize;
  throw ModelError("unknown sense '" + s + "'");
}

QuboInstance::QuboInstance(std::size_t num_variables,
                           const std::vector<std::pair<IndexPair, double>>& terms,
                           Sense sense_of_origin)
    : n_(num_variables), sense_(sense_of_origin) {
  std::map<IndexPair, double> folded;
  for (const auto& [ij, w] : terms) {
    auto [i, j] = ij;
    if (i > j) std::swap(i, j);
    folded[{i, j}] += w;
  }
  build(std::move(folded));
}

QuboInstance QuboInstance::from_entries(std::size_t num_variables,
                                       const std::map<IndexPair, double>& entries,
                                       Sense sense_of_origin) {
  QuboInstance q;
  q.n_ = num_variables;
  q.sense_ = sense_of_origin;
  std::map<IndexPair, double> folded;
  for (const auto& [ij, w] : entries) {
    auto [i, j] = ij;
    if (i > j) std::swap(i, j);
    folded[{i, j}] += w;
  }
  q.build(std::move(folded));
  return q;
}

void QuboInstance::build(std::map<IndexPair, double> entries) {
  if (n_ > UINT32_MAX) throw ModelError("too many variables");
  for (auto it = entries.begin(); it != entries.end();) {
    const auto [i, j] = it->first;
    if (j >= n_) {
      throw ModelError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") out of range for n = " + std::to_string(n_));
    }
    if (!std::isfinite(it->second)) {
      throw ModelError("non-finite coefficient at (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    }
    if (it->second == 0.0) {
      it = entries.erase(it);
    } else {
      ++it;
    }
  }
  entries_ = std::move(entries);

  diag_.assign(n_, 0.0);
  std::vector<std::size_t> degree(n_, 0);
  num_off_diagonal_ = 0;
  for (const auto& [ij, w] : entries_) {
    if (ij.first == ij.second) {
      diag_[ij.first] = w;
    } else {
      ++degree[ij.first];
      ++degree[ij.second];
      ++num_off_diagonal_;
    }
  }
  row_start_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) row_start_[i + 1] = row_start_[i] + degree[i];
  adj_index_.resize(row_start_[n_]);
  adj_weight_.resize(row_start_[n_]);
  std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (const auto& [ij, w] : entries_) {
    const auto [i, j] = ij;
    if (i == j) continue;
    adj_index_[fill[i]] = j;
    adj_weight_[fill[i]++] = w;
    adj_index_[fill[j]] = i;
    adj_weight_[fill[j]++] = w;
  }
}

double QuboInstance::coefficient(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = entries_.find({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  return it == entries_.end() ? 0.0 : it->second;
}

double QuboInstance::off_diagonal_density() const {
  return n_ < 2 ? 0.0 : density(n_, num_off_diagonal_);
}

MaxCutGraph::MaxCutGraph(std::size_t num_vertices, std::vector<WeightedEdge> edges)
    : n_(num_vertices), edges_(std::move(edges)) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;
  seen.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.u == e.v) throw ModelError("self-loop on vertex " + std::to_string(e.u));
    if (e.u > e.v) throw ModelError("edge endpoints must satisfy u < v");
    if (e.v >= n_) throw ModelError("edge endpoint out of range");
    if (!std::isfinite(e.weight)) throw ModelError("non-finite edge weight");
    seen.emplace_back(e.u, e.v);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw ModelError("duplicate edge");
  }
}

double energy(const QuboInstance& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.num_variables()) {
    throw DimensionError("solution has length " + std::to_string(x.size()) +
                         ", instance has " + std::to_string(q.num_variables()) +
                         " variables");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    e += q.diagonal(i);
    const auto nbr = q.neighbors(i);
    const auto w = q.neighbor_weights(i);
    for (std::size_t k = 0; k < nbr.size(); ++k) {
      if (nbr[k] > i && x[nbr[k]]) e += w[k];
    }
  }
  return e;
}

double flip_delta(const QuboInstance& q, std::span<const std::uint8_t> x, std::size_t i) {
  if (x.size() != q.num_variables()) {
    throw DimensionError("solution length does not match instance");
  }
  if (i >= q.num_variables()) throw ModelError("variable index out of range");
  double field = q.diagonal(i);
  const auto nbr = q.neighbors(i);
  const auto w = q.neighbor_weights(i);
  for (std::size_t k = 0; k < nbr.size(); ++k) {
    if (x[nbr[k]]) field += w[k];
  }
  return x[i] ? -field : field;
}

double density(std::size_t n, std::size_t nnz) {
  if (n < 2) throw ModelError("density needs at least 2 variables");
  const double slots = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(nnz) / slots;
}

double cut_value(const MaxCutGraph& g, std::span<const std::uint8_t> x) {
  if (x.size() != g.num_vertices()) throw DimensionError("bipartition length mismatch");
  double cut = 0.0;
  for (const auto& e : g.edges()) {
    if (x[e.u] != x[e.v]) cut += e.weight;
  }
  return cut;
}

QuboInstance from_maxcut(const MaxCutGraph& g) {
  // cut(x) = sum_{uv} w (x_u + x_v - 2 x_u x_v); negate for minimization.
  std::map<IndexPair, double> q;
  for (const auto& e : g.edges()) {
    q[{e.u, e.u}] -= e.weight;
    q[{e.v, e.v}] -= e.weight;
    q[{e.u, e.v}] += 2.0 * e.weight;
  }
  return QuboInstance::from_entries(g.num_vertices(), q, Sense::maximize);
}

bool energies_close(double a, double b, double reference, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(reference));
}

}  // namespace qready
