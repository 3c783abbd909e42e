#include "qready/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "qready/instance_io.hpp"
#include "qready/simd/kernels.hpp"
#include "qready/svg.hpp"

namespace qready {

double relative_delta_energy(double reference, double candidate) {
  if (reference == 0.0) throw UndefinedRatioError("relative delta energy undefined for reference 0");
  return (reference - candidate) / std::abs(reference);
}

EliteSet elite_filter(const SampleSet& s, double tolerance, std::size_t cap) {
  if (s.empty()) throw std::invalid_argument("elite_filter: empty sample set");
  if (!std::isfinite(tolerance) || !(tolerance > 0.0)) {
    throw std::invalid_argument("elite_filter: tolerance must be finite and positive");
  }
  EliteSet e;
  e.tolerance = tolerance;
  e.reference_energy = s.best().energy;
  const double scale = std::max(1.0, std::abs(e.reference_energy));
  // a few ulps of slack so energies written at the boundary stay inside
  const double window = tolerance * scale + 4.0 * std::numeric_limits<double>::epsilon() * scale;
  for (const auto& sample : s.samples) {
    if (e.members.size() >= cap) break;
    if (std::abs(sample.energy - e.reference_energy) <= window) e.members.push_back(sample);
  }
  return e;
}

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return words;
}

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DimensionError("hamming: length mismatch");
  const auto pa = pack_bits(a);
  const auto pb = pack_bits(b);
  return static_cast<std::size_t>(simd::hamming_words(pa, pb));
}

DistanceMatrix::DistanceMatrix(std::size_t k, std::size_t num_variables)
    : k_(k), n_(num_variables), d_(k * k, 0) {}

DistanceMatrix distance_matrix(std::span<const SolutionVector> solutions) {
  const std::size_t k = solutions.size();
  const std::size_t n = k ? solutions[0].size() : 0;
  std::vector<std::vector<std::uint64_t>> packed;
  packed.reserve(k);
  for (const auto& s : solutions) {
    if (s.size() != n) throw DimensionError("distance_matrix: solutions differ in length");
    packed.push_back(pack_bits(s));
  }
  DistanceMatrix m(k, n);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      m.set(a, b, static_cast<std::uint32_t>(simd::hamming_words(packed[a], packed[b])));
    }
  }
  return m;
}

DistanceMatrix distance_matrix(const EliteSet& e) {
  std::vector<SolutionVector> sols;
  sols.reserve(e.members.size());
  for (const auto& m : e.members) sols.push_back(m.bits);
  return distance_matrix(sols);
}

PairHistogram pair_histogram(const DistanceMatrix& m) {
  PairHistogram h;
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) ++h[m.at(a, b)];
  }
  return h;
}

HistogramStats describe(const PairHistogram& h) {
  HistogramStats s;
  for (const auto& [d, c] : h) s.pairs += c;
  if (s.pairs == 0) return s;
  s.min_distance = h.begin()->first;
  s.max_distance = h.rbegin()->first;
  const double total = static_cast<double>(s.pairs);
  for (const auto& [d, c] : h) s.mean += static_cast<double>(d) * static_cast<double>(c);
  s.mean /= total;
  double m2 = 0.0, m3 = 0.0;
  for (const auto& [d, c] : h) {
    const double dev = static_cast<double>(d) - s.mean;
    m2 += dev * dev * static_cast<double>(c);
    m3 += dev * dev * dev * static_cast<double>(c);
  }
  s.variance = m2 / total;
  s.skewness = s.variance > 0.0 ? (m3 / total) / std::pow(s.variance, 1.5) : 0.0;
  return s;
}

const char* to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
  }
  return "average";
}

Linkage linkage_from_string(const std::string& s) {
  if (s == "single") return Linkage::single;
  if (s == "average") return Linkage::average;
  if (s == "complete") return Linkage::complete;
  throw std::invalid_argument("unknown linkage '" + s + "'");
}

Dendrogram hierarchical_cluster(const DistanceMatrix& m, Linkage linkage) {
  const std::size_t k = m.size();
  Dendrogram out;
  if (k == 0) return out;

  // For average linkage the table holds sums of pairwise distances; the
  // linkage value is sum / (|a| |b|). Sums of integers stay exact, so merge
  // heights do not depend on merge order.
  std::vector<double> table(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) table[a * k + b] = m.at(a, b);
  }
  std::vector<std::size_t> id(k), size(k, 1);
  std::vector<bool> active(k, true);
  for (std::size_t i = 0; i < k; ++i) id[i] = i;
  std::vector<std::size_t> left(2 * k - 1, 0), right(2 * k - 1, 0);

  auto value = [&](std::size_t a, std::size_t b) {
    const double t = table[a * k + b];
    return linkage == Linkage::average ? t / static_cast<double>(size[a] * size[b]) : t;
  };

  for (std::size_t step = 0; step + 1 < k; ++step) {
    std::size_t best_a = 0, best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_lo = 0, best_hi = 0;
    bool found = false;
    for (std::size_t a = 0; a < k; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < k; ++b) {
        if (!active[b]) continue;
        const double v = value(a, b);
        const std::size_t lo = std::min(id[a], id[b]);
        const std::size_t hi = std::max(id[a], id[b]);
        if (!found || v < best || (v == best && (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
          found = true;
          best = v;
          best_a = a;
          best_b = b;
          best_lo = lo;
          best_hi = hi;
        }
      }
    }

    const std::size_t new_id = k + step;
    left[new_id] = best_lo;
    right[new_id] = best_hi;
    out.merges.push_back({best_lo, best_hi, best, size[best_a] + size[best_b]});

    for (std::size_t c = 0; c < k; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      const double ta = table[best_a * k + c];
      const double tb = table[best_b * k + c];
      double merged = 0.0;
      switch (linkage) {
        case Linkage::single: merged = std::min(ta, tb); break;
        case Linkage::complete: merged = std::max(ta, tb); break;
        case Linkage::average: merged = ta + tb; break;
      }
      table[best_a * k + c] = merged;
      table[c * k + best_a] = merged;
    }
    size[best_a] += size[best_b];
    id[best_a] = new_id;
    active[best_b] = false;
  }

  std::vector<std::size_t> stack{2 * k - 2};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node < k) {
      out.leaf_order.push_back(node);
    } else {
      stack.push_back(right[node]);
      stack.push_back(left[node]);
    }
  }
  return out;
}

AnalyticsBundle analyze(const SampleSet& s, double tolerance, Linkage linkage, std::size_t cap) {
  AnalyticsBundle b;
  b.elite = elite_filter(s, tolerance, cap);
  b.distances = distance_matrix(b.elite);
  b.histogram = pair_histogram(b.distances);
  b.stats = describe(b.histogram);
  b.dendrogram = hierarchical_cluster(b.distances, linkage);
  b.linkage = linkage;
  return b;
}

std::string distance_matrix_csv(const DistanceMatrix& m, std::span<const std::size_t> order,
                                bool normalized) {
  std::string out = "index";
  for (const std::size_t c : order) out += "," + std::to_string(c);
  out += '\n';
  for (const std::size_t r : order) {
    out += std::to_string(r);
    for (const std::size_t c : order) {
      out += ',';
      out += normalized ? format_double(m.normalized(r, c)) : std::to_string(m.at(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const PairHistogram& h) {
  std::string out = "distance,count\n";
  for (const auto& [d, c] : h) out += std::to_string(d) + "," + std::to_string(c) + "\n";
  return out;
}

nlohmann::json dendrogram_json(const Dendrogram& d, Linkage linkage) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : d.merges) {
    merges.push_back({{"cluster_a", m.cluster_a},
                      {"cluster_b", m.cluster_b},
                      {"height", m.height},
                      {"new_size", m.new_size}});
  }
  return {{"linkage", to_string(linkage)}, {"merges", merges}, {"leaf_order", d.leaf_order}};
}

nlohmann::json summary_json(const AnalyticsBundle& b) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [d, c] : b.histogram) hist.push_back({d, c});
  return {{"elite_count", b.elite.size()},
          {"reference_energy", b.elite.reference_energy},
          {"tolerance", b.elite.tolerance},
          {"num_variables", b.distances.num_variables()},
          {"histogram", hist},
          {"histogram_stats",
           {{"pairs", b.stats.pairs},
            {"mean", b.stats.mean},
            {"variance", b.stats.variance},
            {"skewness", b.stats.skewness},
            {"min_distance", b.stats.min_distance},
            {"max_distance", b.stats.max_distance}}},
          {"dendrogram", dendrogram_json(b.dendrogram, b.linkage)}};
}

std::string render_diversity_svg(const AnalyticsBundle& b, const std::string& title) {
  const std::size_t k = b.distances.size();
  const double margin = 50.0, plot = 480.0, dendro_h = 140.0, bar_w = 18.0;
  const double width = margin * 2 + plot + 110.0;
  const double height = margin + dendro_h + plot + 60.0;
  SvgWriter svg(width, height);
  svg.text(width / 2, 22, title, 14, "middle");
  if (k == 0) return svg.finish();

  const double top = margin + dendro_h;
  std::uint32_t max_d = 1;
  for (const auto& [d, c] : b.histogram) max_d = std::max(max_d, d);

  // Heatmap, block-averaged so large elite sets stay a bounded file size.
  const std::size_t cells = std::min<std::size_t>(k, 160);
  const double cell = plot / static_cast<double>(cells);
  const auto& order = b.dendrogram.leaf_order;
  for (std::size_t r = 0; r < cells; ++r) {
    const std::size_t r0 = r * k / cells, r1 = (r + 1) * k / cells;
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t c0 = c * k / cells, c1 = (c + 1) * k / cells;
      double sum = 0.0;
      for (std::size_t i = r0; i < r1; ++i) {
        for (std::size_t j = c0; j < c1; ++j) sum += b.distances.at(order[i], order[j]);
      }
      const double mean = sum / static_cast<double>((r1 - r0) * (c1 - c0));
      svg.rect(margin + c * cell, top + r * cell, cell + 0.3, cell + 0.3,
               heat_color(mean / max_d));
    }
  }

  // Dendrogram: x of a leaf is the centre of its heatmap column.
  double max_h = 0.0;
  for (const auto& m : b.dendrogram.merges) max_h = std::max(max_h, m.height);
  if (max_h <= 0.0) max_h = 1.0;
  std::vector<double> xs(2 * k - 1, 0.0), ys(2 * k - 1, top);
  for (std::size_t pos = 0; pos < k; ++pos) {
    xs[order[pos]] = margin + (static_cast<double>(pos) + 0.5) * plot / static_cast<double>(k);
  }
  for (std::size_t i = 0; i < b.dendrogram.merges.size(); ++i) {
    const auto& m = b.dendrogram.merges[i];
    const std::size_t node = k + i;
    const double y = top - 6.0 - (dendro_h - 16.0) * m.height / max_h;
    xs[node] = (xs[m.cluster_a] + xs[m.cluster_b]) / 2;
    ys[node] = y;
    svg.line(xs[m.cluster_a], ys[m.cluster_a], xs[m.cluster_a], y, "#333", 0.7);
    svg.line(xs[m.cluster_b], ys[m.cluster_b], xs[m.cluster_b], y, "#333", 0.7);
    svg.line(xs[m.cluster_a], y, xs[m.cluster_b], y, "#333", 0.7);
  }
  svg.text(margin - 8, top - 6.0 - (dendro_h - 16.0), SvgWriter::num(max_h), 9, "end");
  svg.text(margin - 8, top - 6.0, "0", 9, "end");

  // Colorbar: raw Hamming distance on the right, normalized in parentheses.
  const double bx = margin + plot + 20.0;
  const int steps = 64;
  for (int s = 0; s < steps; ++s) {
    const double t = 1.0 - static_cast<double>(s) / (steps - 1);
    svg.rect(bx, top + s * plot / steps, bar_w, plot / steps + 0.3, heat_color(t));
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, b.distances.num_variables()));
  for (int tick = 0; tick <= 4; ++tick) {
    const double frac = tick / 4.0;
    const double d = max_d * (1.0 - frac);
    svg.text(bx + bar_w + 4, top + frac * plot + 4,
             SvgWriter::num(d) + " (" + SvgWriter::num(d / n) + ")", 9);
  }

  // Inset histogram of pair counts per distance.
  const double ix = margin + plot * 0.55, iy = top + plot * 0.62, iw = plot * 0.4, ih = plot * 0.33;
  svg.rect(ix, iy, iw, ih, "white", "fill-opacity=\"0.85\" stroke=\"#444\"");
  std::uint64_t max_c = 1;
  for (const auto& [d, c] : b.histogram) max_c = std::max(max_c, c);
  for (const auto& [d, c] : b.histogram) {
    const double x = ix + 4 + (iw - 8) * static_cast<double>(d) / max_d;
    const double h = (ih - 16) * static_cast<double>(c) / static_cast<double>(max_c);
    svg.line(x, iy + ih - 4, x, iy + ih - 4 - h, "#225ea8", 1.5);
  }
  svg.text(ix + iw / 2, iy + 11, "pairs per Hamming distance", 9, "middle");

  svg.text(margin, height - 20,
           "k = " + std::to_string(k) + " elite solutions, n = " +
               std::to_string(b.distances.num_variables()) + ", linkage = " + to_string(b.linkage),
           11);
  return svg.finish();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

void write_analytics(const AnalyticsBundle& b, const std::filesystem::path& dir,
                     const std::string& title) {
  std::filesystem::create_directories(dir);
  const auto& order = b.dendrogram.leaf_order;
  write_file(dir / "distances.csv", distance_matrix_csv(b.distances, order, false));
  write_file(dir / "distances_normalized.csv", distance_matrix_csv(b.distances, order, true));
  write_file(dir / "histogram.csv", histogram_csv(b.histogram));
  write_file(dir / "dendrogram.json", dendrogram_json(b.dendrogram, b.linkage).dump(2) + "\n");
  write_file(dir / "analytics.json", summary_json(b).dump(2) + "\n");
  write_file(dir / "diversity.svg", render_diversity_svg(b, title));
}

}  // namespace qready
