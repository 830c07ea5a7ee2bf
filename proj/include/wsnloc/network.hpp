#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/geometry.hpp"

namespace wsnloc {

/// Ground truth for one deployment: unknown-node positions, true and reported
/// anchor positions, and the ranging radius. Indices are zero-based.
struct Scenario {
  std::vector<Point2> unknowns;
  std::vector<Point2> anchors_true;
  std::vector<Point2> anchors_reported;
  double d_max = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t num_unknowns() const { return unknowns.size(); }
  [[nodiscard]] std::size_t num_anchors() const { return anchors_true.size(); }

  void validate() const {
    detail::require(!unknowns.empty(), "scenario needs at least one unknown node");
    detail::require(!anchors_true.empty(), "scenario needs at least one anchor");
    detail::require(anchors_reported.size() == anchors_true.size(),
                    "anchors_reported and anchors_true differ in length");
    detail::require(d_max > 0.0 && std::isfinite(d_max), "d_max must be positive and finite");
    for (const auto* list : {&unknowns, &anchors_true, &anchors_reported}) {
      for (const auto& p : *list) detail::require(p.finite(), "non-finite coordinate in scenario");
    }
  }
};

/// Per-unknown neighbor sets under the ranging limit. lu_lu[n] holds other
/// unknown indices, lu_anchor[n] holds anchor indices; both sorted ascending.
struct NeighborSets {
  std::vector<std::vector<std::size_t>> lu_lu;
  std::vector<std::vector<std::size_t>> lu_anchor;
};

/// Membership is decided from true positions, boundary distance included.
inline NeighborSets neighbor_sets(const Scenario& scenario) {
  scenario.validate();
  const std::size_t n_unknown = scenario.num_unknowns();
  const std::size_t n_anchor = scenario.num_anchors();
  NeighborSets sets;
  sets.lu_lu.resize(n_unknown);
  sets.lu_anchor.resize(n_unknown);
  for (std::size_t n = 0; n < n_unknown; ++n) {
    for (std::size_t k = 0; k < n_unknown; ++k) {
      if (k != n && true_distance(scenario.unknowns[n], scenario.unknowns[k]) <= scenario.d_max) {
        sets.lu_lu[n].push_back(k);
      }
    }
    for (std::size_t m = 0; m < n_anchor; ++m) {
      if (true_distance(scenario.unknowns[n], scenario.anchors_true[m]) <= scenario.d_max) {
        sets.lu_anchor[n].push_back(m);
      }
    }
  }
  return sets;
}

/// Fraction of possible links present: sum of neighbor-set sizes over N^2 + N*M.
/// Self-pairs are in the denominator, so the value stays below one.
inline double connectivity_measure(const NeighborSets& sets, std::size_t n_unknown,
                                   std::size_t n_anchor) {
  detail::require(n_unknown >= 1, "connectivity needs at least one unknown node");
  detail::require(sets.lu_lu.size() == n_unknown && sets.lu_anchor.size() == n_unknown,
                  "neighbor sets do not match the unknown count");
  std::size_t links = 0;
  for (std::size_t n = 0; n < n_unknown; ++n) {
    links += sets.lu_lu[n].size() + sets.lu_anchor[n].size();
  }
  const double denom = static_cast<double>(n_unknown) * static_cast<double>(n_unknown) +
                       static_cast<double>(n_unknown) * static_cast<double>(n_anchor);
  return static_cast<double>(links) / denom;
}

/// True when unknowns and anchors form a single component of the union graph.
/// Anchors are vertices N..N+M-1; anchor-anchor links are never present.
inline bool is_fully_connected(const NeighborSets& sets, std::size_t n_unknown,
                               std::size_t n_anchor) {
  detail::require(sets.lu_lu.size() == n_unknown && sets.lu_anchor.size() == n_unknown,
                  "neighbor sets do not match the unknown count");
  const std::size_t total = n_unknown + n_anchor;
  if (total == 0) return true;

  std::vector<std::size_t> parent(total);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::size_t components = total;
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  };

  for (std::size_t n = 0; n < n_unknown; ++n) {
    for (std::size_t k : sets.lu_lu[n]) {
      detail::require(k < n_unknown, "unknown neighbor index out of range");
      unite(n, k);
    }
    for (std::size_t m : sets.lu_anchor[n]) {
      detail::require(m < n_anchor, "anchor neighbor index out of range");
      unite(n, n_unknown + m);
    }
  }
  return components == 1;
}

}  // namespace wsnloc
