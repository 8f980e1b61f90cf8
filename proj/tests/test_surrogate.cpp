#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "ppn/surrogate.hpp"

using namespace ppn;
using ppn_tests::cycle_graph;
using ppn_tests::path_graph;
using ppn_tests::random_connected_graph;
using ppn_tests::star_graph;
using ppn_tests::triangle;
using ppn_tests::triangle_with_pendant;
using ppn_tests::two_cliques_with_bridge;

namespace {

std::vector<NodeIndex> sorted_degrees(const SimpleGraph& g) {
  auto d = degree_sequence(g);
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

TEST_CASE("sample_surrogate preserves degrees, simplicity, connectivity") {
  SplitMix64 seeder(1);
  for (int trial = 0; trial < 15; ++trial) {
    auto g = random_connected_graph(5 + static_cast<NodeIndex>(seeder.below(40)),
                                    seeder.below(60), seeder);
    auto reference_degrees = sorted_degrees(g);
    for (int i = 0; i < 5; ++i) {
      SplitMix64 rng(SplitMix64::derive(1234, static_cast<std::uint64_t>(trial * 5 + i)));
      auto s = sample_surrogate(g, rng);
      CHECK(s.num_nodes == g.num_nodes);
      CHECK(s.edges.size() == g.edges.size());
      CHECK(sorted_degrees(s) == reference_degrees);
      CHECK(is_connected(s));
      // from_edge_list construction already rejects loops/parallels; double-check
      for (auto [u, v] : s.edges) CHECK(u != v);
    }
  }
}

TEST_CASE("unique-realization degree sequences come back isomorphic") {
  // These degree sequences admit exactly one connected simple graph, so any
  // valid surrogate is an isomorphic copy.
  auto check_unique = [](const SimpleGraph& g) {
    auto want = sorted_degrees(g);
    for (std::uint64_t i = 0; i < 25; ++i) {
      SplitMix64 rng(SplitMix64::derive(7, i));
      auto s = sample_surrogate(g, rng, 20);
      CHECK(sorted_degrees(s) == want);
      CHECK(is_connected(s));
      CHECK(s.edges.size() == g.edges.size());
    }
  };
  check_unique(cycle_graph(4));
  check_unique(path_graph(3));
  check_unique(star_graph(3));
}

TEST_CASE("graphs with fewer than two edges come back unchanged") {
  auto single = ppn_tests::make_graph(2, {{0, 1}});
  SplitMix64 rng(5);
  auto s = sample_surrogate(single, rng);
  CHECK(s.edges == single.edges);
}

TEST_CASE("sample_surrogate rejects disconnected references") {
  auto g = ppn_tests::make_graph(4, {{0, 1}, {2, 3}});
  SplitMix64 rng(5);
  CHECK_THROWS_AS(sample_surrogate(g, rng), std::invalid_argument);
}

TEST_CASE("summarize_surrogates computes the display equation") {
  SurrogateResult r;
  r.m_orig = 10.0;
  r.surrogate_values = {2.0, 6.0};  // mu 4, population sigma 2
  r.rejection_threshold = 2.0;
  summarize_surrogates(r);
  CHECK(r.mu_surr == 4.0);
  CHECK(r.sigma_surr == 2.0);
  CHECK(r.s_score == 3.0);
  CHECK(r.rejected);
}

TEST_CASE("summarize_surrogates handles zero spread explicitly") {
  SECTION("matching statistic: S = 0, keep the null") {
    SurrogateResult r;
    r.m_orig = 0.5;
    r.surrogate_values = {0.5, 0.5, 0.5};
    summarize_surrogates(r);
    CHECK(r.sigma_surr == 0.0);
    CHECK(r.s_score == 0.0);
    CHECK_FALSE(r.rejected);
  }
  SECTION("mismatching statistic: S = infinity, reject") {
    SurrogateResult r;
    r.m_orig = 0.9;
    r.surrogate_values = {0.5, 0.5, 0.5};
    summarize_surrogates(r);
    CHECK(r.sigma_surr == 0.0);
    CHECK(std::isinf(r.s_score));
    CHECK(r.rejected);
  }
}

TEST_CASE("surrogate_test on C4 yields sigma 0 and keeps the null") {
  auto result = surrogate_test(cycle_graph(4), max_partition_density_statistic, 20,
                               42, 10, 2.0, 2);
  CHECK(result.sigma_surr == 0.0);
  CHECK(result.s_score == 0.0);
  CHECK_FALSE(result.rejected);
  CHECK(result.mu_surr == result.m_orig);
}

TEST_CASE("surrogate_test is deterministic and thread-count independent") {
  SplitMix64 seeder(33);
  auto g = random_connected_graph(24, 30, seeder);
  auto a = surrogate_test(g, max_partition_density_statistic, 25, 99, 10, 2.0, 1);
  auto b = surrogate_test(g, max_partition_density_statistic, 25, 99, 10, 2.0, 2);
  auto c = surrogate_test(g, max_partition_density_statistic, 25, 99, 10, 2.0, 0);
  CHECK(a.surrogate_values == b.surrogate_values);
  CHECK(a.surrogate_values == c.surrogate_values);
  CHECK(a.s_score == b.s_score);
  CHECK(a.rejected == b.rejected);

  auto other_seed = surrogate_test(g, max_partition_density_statistic, 25, 100, 10, 2.0, 2);
  CHECK(other_seed.surrogate_values != a.surrogate_values);
}

TEST_CASE("surrogate_test validates n_s") {
  CHECK_THROWS_AS(
      surrogate_test(triangle(), max_partition_density_statistic, 1, 1),
      std::invalid_argument);
}

TEST_CASE("planted two-clique structure is rejected") {
  auto g = two_cliques_with_bridge(6);
  auto result =
      surrogate_test(g, max_partition_density_statistic, 99, 20110901, 10, 2.0, 2);
  CHECK(result.m_orig > result.mu_surr);
  CHECK(result.s_score > 2.0);
  CHECK(result.rejected);
}

TEST_CASE("max_partition_density_statistic fixture values") {
  CHECK(max_partition_density_statistic(triangle()) == Catch::Approx(1.0));
  CHECK(max_partition_density_statistic(triangle_with_pendant()) ==
        Catch::Approx(0.75));
  CHECK(max_partition_density_statistic(path_graph(3)) == 0.0);
}
