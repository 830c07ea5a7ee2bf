#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/network.hpp"

using namespace wsnloc;
using Sizes = std::vector<std::size_t>;

namespace {

Scenario make(std::vector<Point2> lu, std::vector<Point2> la, double d_max) {
  Scenario s;
  s.unknowns = std::move(lu);
  s.anchors_true = la;
  s.anchors_reported = std::move(la);
  s.d_max = d_max;
  return s;
}

NeighborSets sets_from(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> uu,
                       std::vector<std::pair<std::size_t, std::size_t>> ua) {
  NeighborSets s;
  s.lu_lu.resize(n);
  s.lu_anchor.resize(n);
  for (auto [a, b] : uu) {
    s.lu_lu[a].push_back(b);
    s.lu_lu[b].push_back(a);
  }
  for (auto [a, m] : ua) s.lu_anchor[a].push_back(m);
  return s;
}

}  // namespace

TEST(NeighborSets, PairInRangeAnchorOutOfRange) {
  const auto sets = neighbor_sets(make({{0, 0}, {0.3, 0}}, {{1, 1}}, 0.5));
  EXPECT_EQ(sets.lu_lu[0], Sizes{1});
  EXPECT_EQ(sets.lu_lu[1], Sizes{0});
  EXPECT_TRUE(sets.lu_anchor[0].empty());
  EXPECT_TRUE(sets.lu_anchor[1].empty());
}

TEST(NeighborSets, TinyRadiusGivesEmptySets) {
  testsupport::Gen g(3);
  const auto sets = neighbor_sets(make(g.points(6), g.points(3), 1e-12));
  for (std::size_t n = 0; n < 6; ++n) {
    EXPECT_TRUE(sets.lu_lu[n].empty());
    EXPECT_TRUE(sets.lu_anchor[n].empty());
  }
}

TEST(NeighborSets, BoundaryDistanceIncluded) {
  const auto sets = neighbor_sets(make({{0, 0}, {0.5, 0}}, {{0, 0.5}}, 0.5));
  EXPECT_EQ(sets.lu_lu[0], Sizes{1});
  EXPECT_EQ(sets.lu_anchor[0], Sizes{0});
  EXPECT_TRUE(sets.lu_anchor[1].empty());
}

TEST(NeighborSets, UsesTruePositionsNotReported) {
  Scenario s = make({{0, 0}}, {{0.4, 0}}, 0.5);
  s.anchors_reported = {{5, 5}};
  EXPECT_EQ(neighbor_sets(s).lu_anchor[0], Sizes{0});
}

TEST(NeighborSets, RejectsInvalidScenario) {
  EXPECT_THROW(neighbor_sets(make({}, {{0, 0}}, 0.5)), InvalidArgument);
  EXPECT_THROW(neighbor_sets(make({{0, 0}}, {}, 0.5)), InvalidArgument);
  EXPECT_THROW(neighbor_sets(make({{0, 0}}, {{0, 0}}, 0.0)), InvalidArgument);
  EXPECT_THROW(neighbor_sets(make({{NAN, 0}}, {{0, 0}}, 0.5)), InvalidArgument);
}

TEST(Connectivity, EmptySetsGiveZero) {
  EXPECT_EQ(connectivity_measure(sets_from(3, {}, {}), 3, 2), 0.0);
}

TEST(Connectivity, TwoUnknownsOneAnchorComplete) {
  const auto sets = sets_from(2, {{0, 1}}, {{0, 0}, {1, 0}});
  EXPECT_DOUBLE_EQ(connectivity_measure(sets, 2, 1), 2.0 / 3.0);
}

TEST(Connectivity, SinglePair) {
  EXPECT_DOUBLE_EQ(connectivity_measure(sets_from(1, {}, {{0, 0}}), 1, 1), 0.5);
}

TEST(FullyConnected, Chain) {
  EXPECT_TRUE(is_fully_connected(sets_from(2, {{0, 1}}, {{1, 0}}), 2, 1));
}

TEST(FullyConnected, DisjointPairs) {
  EXPECT_FALSE(is_fully_connected(sets_from(2, {}, {{0, 0}, {1, 1}}), 2, 2));
}

TEST(FullyConnected, SingleEdge) { EXPECT_TRUE(is_fully_connected(sets_from(1, {}, {{0, 0}}), 1, 1)); }

TEST(FullyConnected, IsolatedAnchor) {
  EXPECT_FALSE(is_fully_connected(sets_from(2, {{0, 1}}, {{0, 0}}), 2, 2));
}

TEST(NetworkProperties, RandomScenarios) {
  testsupport::Gen g(20240501);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = g.index(1, 10), m = g.index(1, 5);
    const double d_small = g.uniform(0.05, 0.8);
    const double d_big = d_small + g.uniform(0.0, 0.6);
    Scenario s = make(g.points(n), g.points(m), d_small);
    const auto small = neighbor_sets(s);
    s.d_max = d_big;
    const auto big = neighbor_sets(s);

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_FALSE(std::ranges::binary_search(small.lu_lu[i], i));
      for (std::size_t k : small.lu_lu[i]) {
        EXPECT_TRUE(std::ranges::binary_search(small.lu_lu[k], i));
        EXPECT_LE(true_distance(s.unknowns[i], s.unknowns[k]), d_small);
        edges.emplace_back(i, k);
      }
      for (std::size_t a : small.lu_anchor[i]) edges.emplace_back(i, n + a);
      for (std::size_t k : small.lu_lu[i]) EXPECT_TRUE(std::ranges::binary_search(big.lu_lu[i], k));
      for (std::size_t a : small.lu_anchor[i]) {
        EXPECT_TRUE(std::ranges::binary_search(big.lu_anchor[i], a));
      }
    }

    const double c_small = connectivity_measure(small, n, m);
    const double c_big = connectivity_measure(big, n, m);
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    EXPECT_GE(c_small, 0.0);
    EXPECT_LE(c_small, c_big);
    EXPECT_LE(c_big, (nd * (nd - 1) + nd * md) / (nd * nd + nd * md) + 1e-15);
    EXPECT_LT(c_big, 1.0);
    EXPECT_EQ(is_fully_connected(small, n, m), testsupport::bfs_connected(n + m, edges));
  }
}
