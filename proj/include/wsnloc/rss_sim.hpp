#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/geometry.hpp"
#include "wsnloc/network.hpp"

namespace wsnloc {

/// Channel and deployment parameters. Defaults are the typical experiment values.
struct ChannelParams {
  double gamma_p = 3.0;   // path-loss exponent
  double sigma_db = 3.5;  // shadowing std-dev, dB
  double epsilon = 0.01;  // anchor-error scale, m
  double d_max = 0.5;     // ranging radius, m

  void validate() const {
    detail::require(gamma_p > 0.0 && std::isfinite(gamma_p), "gamma_p must be positive");
    detail::require(sigma_db >= 0.0 && std::isfinite(sigma_db), "sigma_dB must be non-negative");
    detail::require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be non-negative");
    detail::require(d_max > 0.0 && std::isfinite(d_max), "d_max must be positive");
  }
};

enum class EdgeKind { UnknownUnknown, UnknownAnchor };

/// One measured link. For UnknownUnknown, i < j are unknown indices; for
/// UnknownAnchor, i is an unknown index and j an anchor index.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  EdgeKind kind = EdgeKind::UnknownUnknown;
  double d_bar = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Everything the estimator is allowed to see.
struct MeasurementSet {
  std::size_t n = 0;
  std::size_t m = 0;
  double d_max = 0.0;
  std::vector<Point2> anchors_reported;
  std::vector<Edge> edges;

  void validate() const {
    detail::require(n >= 1, "measurement set needs at least one unknown node");
    detail::require(m >= 1, "measurement set needs at least one anchor");
    detail::require(anchors_reported.size() == m, "anchors_reported length differs from m");
    for (const auto& a : anchors_reported) detail::require(a.finite(), "non-finite anchor coordinate");
    std::vector<char> seen_uu(n * n, 0);
    std::vector<char> seen_ua(n * m, 0);
    for (const auto& e : edges) {
      detail::require(e.d_bar > 0.0 && std::isfinite(e.d_bar), "edge distance must be positive");
      detail::require(e.i < n, "edge endpoint out of range");
      if (e.kind == EdgeKind::UnknownUnknown) {
        detail::require(e.j < n && e.i != e.j, "unknown-unknown edge endpoint invalid");
        const std::size_t lo = std::min(e.i, e.j);
        const std::size_t hi = std::max(e.i, e.j);
        detail::require(!seen_uu[lo * n + hi], "duplicate unknown-unknown edge");
        seen_uu[lo * n + hi] = 1;
      } else {
        detail::require(e.j < m, "anchor index out of range");
        detail::require(!seen_ua[e.i * m + e.j], "duplicate unknown-anchor edge");
        seen_ua[e.i * m + e.j] = 1;
      }
    }
  }
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (base, stream); used to derive independent substreams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double unit_uniform(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

/// Log-normal shadowing for a given dB gain alpha.
inline double fade_distance(double d, double gamma_p, double alpha_db) {
  return d * std::pow(10.0, alpha_db / (10.0 * gamma_p));
}

inline double fade_distance(double d, const ChannelParams& params, Rng& rng) {
  detail::require(d > 0.0, "fade_distance needs a positive distance");
  const double alpha = params.sigma_db * standard_normal(rng);
  return fade_distance(d, params.gamma_p, alpha);
}

/// a + eps * (r cos(theta), r sin(theta)).
inline Point2 perturb_anchor(const Point2& a, double epsilon, double r, double theta) {
  return {a.x + epsilon * r * std::cos(theta), a.y + epsilon * r * std::sin(theta)};
}

/// r ~ N(0,1), theta ~ U(0, 2pi).
inline Point2 perturb_anchor(const Point2& a, double epsilon, Rng& rng) {
  detail::require(epsilon >= 0.0, "epsilon must be non-negative");
  const double r = standard_normal(rng);
  const double theta = 2.0 * std::numbers::pi * unit_uniform(rng);
  return perturb_anchor(a, epsilon, r, theta);
}

inline constexpr std::size_t kDefaultMaxAttempts = 10000;

/// Uniform deployment on the unit square, resampled until the union graph is
/// connected. Attempt k draws from substream mix_seed(seed, k).
inline Scenario generate_scenario(std::size_t n_unknown, std::size_t n_anchor,
                                  const ChannelParams& params, std::uint64_t seed,
                                  std::size_t max_attempts = kDefaultMaxAttempts) {
  detail::require(n_unknown >= 1, "N must be at least 1");
  detail::require(n_anchor >= 1, "M must be at least 1");
  params.validate();

  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    Scenario s;
    s.d_max = params.d_max;
    s.seed = seed;
    s.unknowns.reserve(n_unknown);
    s.anchors_true.reserve(n_anchor);
    for (std::size_t n = 0; n < n_unknown; ++n) {
      const double x = unit_uniform(rng);
      const double y = unit_uniform(rng);
      s.unknowns.push_back({x, y});
    }
    for (std::size_t m = 0; m < n_anchor; ++m) {
      const double x = unit_uniform(rng);
      const double y = unit_uniform(rng);
      s.anchors_true.push_back({x, y});
    }
    s.anchors_reported = s.anchors_true;
    if (!is_fully_connected(neighbor_sets(s), n_unknown, n_anchor)) continue;
    for (std::size_t m = 0; m < n_anchor; ++m) {
      s.anchors_reported[m] = perturb_anchor(s.anchors_true[m], params.epsilon, rng);
    }
    return s;
  }
  throw GenerationError("cannot generate connected network after " +
                        std::to_string(max_attempts) + " attempts");
}

/// One faded measurement per neighbor pair, unknown-unknown pairs listed once
/// with i < j, followed by unknown-anchor pairs in (n, m) order.
inline MeasurementSet make_measurements(const Scenario& scenario, const ChannelParams& params,
                                        Rng& rng) {
  params.validate();
  const NeighborSets sets = neighbor_sets(scenario);
  MeasurementSet meas;
  meas.n = scenario.num_unknowns();
  meas.m = scenario.num_anchors();
  meas.d_max = scenario.d_max;
  meas.anchors_reported = scenario.anchors_reported;

  for (std::size_t n = 0; n < meas.n; ++n) {
    for (std::size_t k : sets.lu_lu[n]) {
      if (k <= n) continue;
      const double d = true_distance(scenario.unknowns[n], scenario.unknowns[k]);
      meas.edges.push_back({n, k, EdgeKind::UnknownUnknown, fade_distance(d, params, rng)});
    }
  }
  for (std::size_t n = 0; n < meas.n; ++n) {
    for (std::size_t m : sets.lu_anchor[n]) {
      const double d = true_distance(scenario.unknowns[n], scenario.anchors_true[m]);
      meas.edges.push_back({n, m, EdgeKind::UnknownAnchor, fade_distance(d, params, rng)});
    }
  }
  return meas;
}

struct SimulatedTrial {
  Scenario scenario;
  MeasurementSet measurements;
};

// Substream index for measurement noise; far above any rejection-attempt index.
inline constexpr std::uint64_t kMeasurementStream = std::uint64_t{1} << 40;

/// Deployment from `seed` and faded measurements from its measurement substream.
inline SimulatedTrial simulate_trial(std::size_t n_unknown, std::size_t n_anchor,
                                     const ChannelParams& params, std::uint64_t seed) {
  SimulatedTrial t;
  t.scenario = generate_scenario(n_unknown, n_anchor, params, seed);
  Rng rng(mix_seed(seed, kMeasurementStream));
  t.measurements = make_measurements(t.scenario, params, rng);
  return t;
}

/// Neighbor sets as observed from the measured edge list.
inline NeighborSets neighbor_sets(const MeasurementSet& meas) {
  NeighborSets sets;
  sets.lu_lu.resize(meas.n);
  sets.lu_anchor.resize(meas.n);
  for (const auto& e : meas.edges) {
    if (e.kind == EdgeKind::UnknownUnknown) {
      sets.lu_lu[e.i].push_back(e.j);
      sets.lu_lu[e.j].push_back(e.i);
    } else {
      sets.lu_anchor[e.i].push_back(e.j);
    }
  }
  for (auto& v : sets.lu_lu) std::sort(v.begin(), v.end());
  for (auto& v : sets.lu_anchor) std::sort(v.begin(), v.end());
  return sets;
}

}  // namespace wsnloc
