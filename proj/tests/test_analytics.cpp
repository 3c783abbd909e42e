#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qready/analytics.hpp"

using namespace qready;

namespace {

SampleSet with_energies(const std::vector<double>& energies, std::size_t n = 8) {
  SampleSet s;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    s.samples.push_back({oracle::bits_of(i, n), energies[i], 0.0});
  }
  std::sort(s.samples.begin(), s.samples.end(), sample_less);
  return s;
}

DistanceMatrix random_matrix(std::size_t k, std::mt19937_64& rng, bool distinct) {
  // distinct: values spread over 2^30 so that neither distances nor
  // average-linkage means collide in practice
  DistanceMatrix m(k, 10000);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      m.set(a, b, distinct ? static_cast<std::uint32_t>(1 + rng() % (1u << 30))
                           : static_cast<std::uint32_t>(rng() % 6));
    }
  }
  return m;
}

DistanceMatrix permuted(const DistanceMatrix& m, const std::vector<std::size_t>& perm) {
  // new index p[i] holds old index i
  DistanceMatrix out(m.size(), m.num_variables());
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) out.set(perm[a], perm[b], m.at(a, b));
  }
  return out;
}

/// (sorted leaf set, height) for every internal node.
std::set<std::pair<std::vector<std::size_t>, double>> clusters(const Dendrogram& d, std::size_t k,
                                                               const std::vector<std::size_t>* relabel) {
  std::vector<std::vector<std::size_t>> members(2 * k - 1);
  for (std::size_t i = 0; i < k; ++i) members[i] = {relabel ? (*relabel)[i] : i};
  std::set<std::pair<std::vector<std::size_t>, double>> out;
  for (std::size_t s = 0; s < d.merges.size(); ++s) {
    auto& node = members[k + s];
    node = members[d.merges[s].cluster_a];
    node.insert(node.end(), members[d.merges[s].cluster_b].begin(), members[d.merges[s].cluster_b].end());
    std::sort(node.begin(), node.end());
    out.insert({node, d.merges[s].height});
  }
  return out;
}

std::vector<double> heights(const Dendrogram& d) {
  std::vector<double> h;
  for (const auto& m : d.merges) h.push_back(m.height);
  std::sort(h.begin(), h.end());
  return h;
}

}  // namespace

TEST_CASE("relative delta energy") {
  CHECK(relative_delta_energy(-100, -101) == doctest::Approx(0.01));
  CHECK(relative_delta_energy(-100, -99) == doctest::Approx(-0.01));
  CHECK(relative_delta_energy(50, 49) == doctest::Approx(0.02));
  CHECK_THROWS_AS(relative_delta_energy(0.0, 1.0), UndefinedRatioError);
}

TEST_CASE("elite tolerance semantics") {
  SUBCASE("large magnitude scales the window") {
    const auto s = with_energies({-100.0, -100.0 + 5e-5, -100.0 + 1e-4, -100.0 + 2e-4, -99.0});
    const EliteSet e = elite_filter(s, 1e-6);
    CHECK(e.size() == 3);
    CHECK(e.reference_energy == -100.0);
  }
  SUBCASE("small magnitude uses an absolute window") {
    const auto s = with_energies({0.5, 0.5 + 5e-7, 0.5 + 2e-6});
    CHECK(elite_filter(s, 1e-6).size() == 2);
  }
  SUBCASE("cap and errors") {
    const auto s = with_energies(std::vector<double>(20, -3.0));
    CHECK(elite_filter(s, 1e-6, 7).size() == 7);
    CHECK_THROWS(elite_filter(SampleSet{}, 1e-6));
    CHECK_THROWS(elite_filter(s, 0.0));
    CHECK_THROWS(elite_filter(s, NAN));
  }
}

TEST_CASE("hamming distance matches the byte-wise count") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = rng() % 300;
    const auto a = oracle::random_bits(n, rng);
    const auto b = oracle::random_bits(n, rng);
    CHECK(hamming(a, b) == oracle::naive_hamming(a, b));
  }
  CHECK_THROWS_AS(hamming(SolutionVector(3), SolutionVector(4)), DimensionError);
  const auto w = pack_bits(SolutionVector{1, 0, 1});
  REQUIRE(w.size() == 1);
  CHECK(w[0] == 5u);
}

TEST_CASE("distance matrix, histogram mass and moments") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = rng() % 40;
    const std::size_t n = 1 + rng() % 100;
    std::vector<SolutionVector> sols;
    for (std::size_t i = 0; i < k; ++i) sols.push_back(oracle::random_bits(n, rng));
    const DistanceMatrix m = distance_matrix(sols);
    for (std::size_t a = 0; a < k; ++a) {
      CHECK(m.at(a, a) == 0);
      for (std::size_t b = 0; b < k; ++b) REQUIRE(m.at(a, b) == oracle::naive_hamming(sols[a], sols[b]));
    }
    const PairHistogram h = pair_histogram(m);
    std::uint64_t mass = 0;
    for (const auto& [d, c] : h) mass += c;
    CHECK(mass == k * (k - 1) / 2);
    const HistogramStats st = describe(h);
    CHECK(st.pairs == mass);
    if (mass > 0) {
      double mean = 0;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) mean += m.at(a, b);
      mean /= double(mass);
      CHECK(st.mean == doctest::Approx(mean));
    }
  }
  const PairHistogram h{{2, 1}, {4, 1}};
  const HistogramStats st = describe(h);
  CHECK(st.mean == 3.0);
  CHECK(st.variance == 1.0);
  CHECK(st.skewness == 0.0);
  CHECK(st.min_distance == 2);
  CHECK(st.max_distance == 4);
}

TEST_CASE("dendrogram structure and monotone heights") {
  std::mt19937_64 rng(3);
  for (Linkage l : {Linkage::single, Linkage::average, Linkage::complete}) {
    for (int t = 0; t < 20; ++t) {
      const std::size_t k = 1 + rng() % 25;
      const DistanceMatrix m = random_matrix(k, rng, t % 2 == 0);
      const Dendrogram d = hierarchical_cluster(m, l);
      REQUIRE(d.merges.size() == k - 1);
      std::vector<std::size_t> order = d.leaf_order;
      std::sort(order.begin(), order.end());
      for (std::size_t i = 0; i < k; ++i) REQUIRE(order[i] == i);
      std::vector<bool> used(2 * k - 1, false);
      for (std::size_t s = 0; s < d.merges.size(); ++s) {
        const Merge& mg = d.merges[s];
        REQUIRE(mg.cluster_a < mg.cluster_b);
        REQUIRE(mg.cluster_b < k + s);
        REQUIRE_FALSE(used[mg.cluster_a]);
        REQUIRE_FALSE(used[mg.cluster_b]);
        used[mg.cluster_a] = used[mg.cluster_b] = true;
        if (s > 0) REQUIRE(mg.height >= d.merges[s - 1].height);
      }
      if (k > 1) CHECK(d.merges.back().new_size == k);
    }
  }
}

TEST_CASE("hand-checked average linkage") {
  // points on a line at 0, 1, 5, 6
  DistanceMatrix m(4, 10);
  const int pos[] = {0, 1, 5, 6};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) m.set(a, b, pos[b] - pos[a]);
  const Dendrogram d = hierarchical_cluster(m, Linkage::average);
  REQUIRE(d.merges.size() == 3);
  CHECK(d.merges[0].cluster_a == 0);
  CHECK(d.merges[0].cluster_b == 1);
  CHECK(d.merges[0].height == 1.0);
  CHECK(d.merges[1].cluster_a == 2);
  CHECK(d.merges[1].cluster_b == 3);
  CHECK(d.merges[2].cluster_a == 4);
  CHECK(d.merges[2].cluster_b == 5);
  CHECK(d.merges[2].height == 5.0);  // (5+6+4+5)/4
  CHECK(d.leaf_order == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(hierarchical_cluster(m, Linkage::complete).merges[2].height == 6.0);
  CHECK(hierarchical_cluster(m, Linkage::single).merges[2].height == 4.0);
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 2 + rng() % 20;
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    // Generic distances: identical clusters and heights for every linkage.
    const DistanceMatrix m = random_matrix(k, rng, true);
    const DistanceMatrix pm = permuted(m, perm);
    for (Linkage l : {Linkage::single, Linkage::average, Linkage::complete}) {
      CHECK(clusters(hierarchical_cluster(m, l), k, &perm) == clusters(hierarchical_cluster(pm, l), k, nullptr));
    }
    // Heavy ties: single-linkage heights are still invariant.
    const DistanceMatrix tm = random_matrix(k, rng, false);
    CHECK(heights(hierarchical_cluster(tm, Linkage::single)) ==
          heights(hierarchical_cluster(permuted(tm, perm), Linkage::single)));
  }
}

TEST_CASE("two separated blobs merge last at the separating distance") {
  std::mt19937_64 rng(5);
  const std::size_t n = 800;
  SolutionVector c1 = oracle::random_bits(n, rng);
  SolutionVector c2 = c1;
  for (std::size_t i = 0; i < 360; ++i) c2[i] ^= 1u;
  std::vector<SolutionVector> sols;
  for (int blob = 0; blob < 2; ++blob) {
    for (int j = 0; j < 15; ++j) {
      SolutionVector x = blob ? c2 : c1;
      x[400 + rng() % 400] ^= 1u;  // within-blob distance at most 2
      sols.push_back(x);
    }
  }
  const DistanceMatrix m = distance_matrix(sols);
  for (Linkage l : {Linkage::single, Linkage::average, Linkage::complete}) {
    const Dendrogram d = hierarchical_cluster(m, l);
    CHECK(d.merges.back().height >= 350.0);
    CHECK(d.merges[d.merges.size() - 2].height <= 2.0);
  }
}

TEST_CASE("analyze bundles and writes artifacts") {
  std::mt19937_64 rng(6);
  SampleSet s;
  for (int i = 0; i < 12; ++i) s.samples.push_back({oracle::random_bits(30, rng), -5.0, 0.0});
  s.samples.push_back({oracle::random_bits(30, rng), -4.0, 0.0});
  std::sort(s.samples.begin(), s.samples.end(), sample_less);
  const AnalyticsBundle b = analyze(s);
  CHECK(b.elite.size() == 12);
  CHECK(b.stats.pairs == 66);
  CHECK(b.dendrogram.merges.size() == 11);

  const auto csv = histogram_csv(b.histogram);
  CHECK(csv.rfind("distance,count\n", 0) == 0);
  const auto j = dendrogram_json(b.dendrogram, b.linkage);
  CHECK(j["linkage"] == "average");
  CHECK(j["merges"].size() == 11);
  CHECK(summary_json(b)["elite_count"] == 12);

  const auto dir = std::filesystem::temp_directory_path() / "qready-analytics-test";
  std::filesystem::remove_all(dir);
  write_analytics(b, dir, "test <set>");
  for (const char* f : {"distances.csv", "distances_normalized.csv", "histogram.csv", "dendrogram.json",
                        "analytics.json", "diversity.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const std::string matrix = distance_matrix_csv(b.distances, b.dendrogram.leaf_order);
  CHECK(std::count(matrix.begin(), matrix.end(), '\n') == 13);
  const std::string svg = render_diversity_svg(b, "t");
  CHECK(svg.find("<svg") == 0);
  CHECK(render_diversity_svg(b, "t") == svg);
  std::filesystem::remove_all(dir);
}
