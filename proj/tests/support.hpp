#pragma once

// Small helpers shared by the test binaries: seeded generators and oracles
// that do not reuse library code paths.

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "wsnloc/geometry.hpp"
#include "wsnloc/rss_sim.hpp"

namespace testsupport {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  wsnloc::Point2 point(double lo = 0.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi)}; }
  std::vector<wsnloc::Point2> points(std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<wsnloc::Point2> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(point(lo, hi));
    return out;
  }
};

// Breadth-first search over an explicit adjacency list built from the edges.
inline bool bfs_connected(std::size_t vertices,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (vertices == 0) return true;
  std::vector<std::vector<std::size_t>> adj(vertices);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(vertices, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        queue.push_back(w);
      }
    }
  }
  return count == vertices;
}

// Measurement set with exact distances between the given true positions.
inline wsnloc::MeasurementSet exact_measurements(const std::vector<wsnloc::Point2>& unknowns,
                                                 const std::vector<wsnloc::Point2>& anchors,
                                                 double d_max) {
  wsnloc::MeasurementSet meas;
  meas.n = unknowns.size();
  meas.m = anchors.size();
  meas.d_max = d_max;
  meas.anchors_reported = anchors;
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    for (std::size_t j = i + 1; j < unknowns.size(); ++j) {
      const double d = wsnloc::true_distance(unknowns[i], unknowns[j]);
      if (d <= d_max) meas.edges.push_back({i, j, wsnloc::EdgeKind::UnknownUnknown, d});
    }
  }
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const double d = wsnloc::true_distance(unknowns[i], anchors[a]);
      if (d <= d_max) meas.edges.push_back({i, a, wsnloc::EdgeKind::UnknownAnchor, d});
    }
  }
  return meas;
}

}  // namespace testsupport
