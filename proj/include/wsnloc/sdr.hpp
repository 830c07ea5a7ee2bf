#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/geometry.hpp"
#include "wsnloc/network.hpp"
#include "wsnloc/rss_sim.hpp"

namespace wsnloc {

// ---------------------------------------------------------------------------
// Selector vectors
//
// The relaxation works on the (N+2)x(N+2) block D = [[Y, X^T], [X, I_2]],
// where column n of X is the position of unknown n. A selector v picks out a
// squared-distance surrogate as v^T D v, which is linear in the entries of D
// and equals the true squared distance whenever Y = X^T X.
// ---------------------------------------------------------------------------

struct SelectorVector {
  Eigen::VectorXd coefficients;
};

/// e_n - e_k padded with two zeros.
inline SelectorVector selector_lu(std::size_t n, std::size_t k, std::size_t n_unknown) {
  detail::require(n < n_unknown && k < n_unknown, "selector_lu index out of range");
  detail::require(n != k, "selector_lu needs two distinct nodes");
  SelectorVector v{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_unknown + 2))};
  v.coefficients[static_cast<Eigen::Index>(n)] = 1.0;
  v.coefficients[static_cast<Eigen::Index>(k)] = -1.0;
  return v;
}

/// e_n followed by the negated anchor coordinates, so that v^T D v = |x_n - a|^2.
inline SelectorVector selector_anchor(std::size_t n, const Point2& anchor, std::size_t n_unknown) {
  detail::require(n < n_unknown, "selector_anchor index out of range");
  SelectorVector v{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_unknown + 2))};
  const auto base = static_cast<Eigen::Index>(n_unknown);
  v.coefficients[static_cast<Eigen::Index>(n)] = 1.0;
  v.coefficients[base] = -anchor.x;
  v.coefficients[base + 1] = -anchor.y;
  return v;
}

inline double quad_form(const Eigen::MatrixXd& d, const SelectorVector& v) {
  const auto dim = v.coefficients.size();
  if (d.rows() != dim || d.cols() != dim) {
    throw InvalidArgument("quad_form dimension mismatch");
  }
  return v.coefficients.dot(d * v.coefficients);
}

/// Builds D = [[Y, X^T], [X, I]] from positions, with Y = X^T X.
inline Eigen::MatrixXd lifted_block(const std::vector<Point2>& positions) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd x(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(0, i) = positions[static_cast<std::size_t>(i)].x;
    x(1, i) = positions[static_cast<std::size_t>(i)].y;
  }
  Eigen::MatrixXd d(n + 2, n + 2);
  d.topLeftCorner(n, n) = x.transpose() * x;
  d.topRightCorner(n, 2) = x.transpose();
  d.bottomLeftCorner(2, n) = x;
  d.bottomRightCorner(2, 2).setIdentity();
  return d;
}

// ---------------------------------------------------------------------------
// Connectivity weighting
// ---------------------------------------------------------------------------

/// Breakpoints and levels of the piecewise weight g(C).
struct KappaSchedule {
  double c_low = 0.01;
  double c_high = 0.1;
  double gamma_low = 0.3;
  double gamma_mid = 0.5;
  double gamma_high = 0.7;
};

/// g(C): zero up to gamma_low (inclusive), c_low up to gamma_mid, linear ramp to
/// c_high at gamma_high, c_high beyond.
inline double weight_kappa(double connectivity, const KappaSchedule& s = {}) {
  if (connectivity <= s.gamma_low) return 0.0;
  if (connectivity <= s.gamma_mid) return s.c_low;
  if (connectivity <= s.gamma_high) {
    const double t = (connectivity - s.gamma_mid) / (s.gamma_high - s.gamma_mid);
    return s.c_low * (1.0 - t) + s.c_high * t;
  }
  return s.c_high;
}

// ---------------------------------------------------------------------------
// Conic standard form
// ---------------------------------------------------------------------------

struct ScalarTerm {
  std::size_t var = 0;
  double coef = 0.0;
};

/// coef * D(row, col), with row <= col. An off-diagonal term therefore covers
/// both symmetric entries once: 2*D(i,j) is written as {i, j, 2}.
struct MatrixTerm {
  std::size_t row = 0;
  std::size_t col = 0;
  double coef = 0.0;
};

struct LinearExpr {
  std::vector<ScalarTerm> scalars;
  std::vector<MatrixTerm> entries;
};

enum class Sense { Equal, GreaterEqual };

struct LinearConstraint {
  LinearExpr lhs;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
};

struct PinnedEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// minimize objective(s, D) subject to constraints, s >= 0, D PSD.
///
/// Scalar variables are non-negative. The PSD block has dimension psd_dim;
/// `pinned` records which block entries are fixed by equality constraints.
struct ConicProblem {
  std::size_t num_scalar_vars = 0;
  std::size_t psd_dim = 0;
  LinearExpr objective;
  std::vector<LinearConstraint> constraints;
  std::vector<PinnedEntry> pinned;

  // Localization bookkeeping.
  std::size_t num_unknowns = 0;
  std::size_t num_regularizer_terms = 0;
  double kappa = 0.0;
};

inline double evaluate(const LinearExpr& expr, const Eigen::VectorXd& scalars,
                       const Eigen::MatrixXd& d) {
  double v = 0.0;
  for (const auto& t : expr.scalars) v += t.coef * scalars[static_cast<Eigen::Index>(t.var)];
  for (const auto& t : expr.entries) {
    v += t.coef * d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col));
  }
  return v;
}

namespace detail {

using EntryMap = std::map<std::pair<std::size_t, std::size_t>, double>;

inline void accumulate_quad(EntryMap& acc, const SelectorVector& v, double scale) {
  const auto& c = v.coefficients;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    for (Eigen::Index j = i; j < c.size(); ++j) {
      if (c[j] == 0.0) continue;
      const double w = (i == j ? 1.0 : 2.0) * c[i] * c[j];
      acc[{static_cast<std::size_t>(i), static_cast<std::size_t>(j)}] += scale * w;
    }
  }
}

inline std::vector<MatrixTerm> to_terms(const EntryMap& acc) {
  std::vector<MatrixTerm> out;
  out.reserve(acc.size());
  for (const auto& [key, coef] : acc) {
    if (coef != 0.0) out.push_back({key.first, key.second, coef});
  }
  return out;
}

}  // namespace detail

/// v^T D v as a linear expression over upper-triangular entries of D.
inline LinearExpr quad_form_expr(const SelectorVector& v) {
  detail::EntryMap acc;
  detail::accumulate_quad(acc, v, 1.0);
  return {{}, detail::to_terms(acc)};
}

/// Pairs entering the regularizer: every unknown-unknown pair without a
/// measurement and every (unknown, anchor) pair without one, over all N
/// unknowns.
struct RegularizerSpec {
  std::vector<std::pair<std::size_t, std::size_t>> non_edge_lu_pairs;
  std::vector<std::pair<std::size_t, std::size_t>> non_edge_anchor_pairs;
  double kappa = 0.0;
};

inline RegularizerSpec regularizer_spec(const MeasurementSet& meas, double kappa) {
  detail::require(kappa >= 0.0 && std::isfinite(kappa), "kappa must be non-negative");
  const NeighborSets sets = neighbor_sets(meas);
  RegularizerSpec spec;
  spec.kappa = kappa;
  for (std::size_t n = 0; n < meas.n; ++n) {
    std::vector<char> linked(meas.n, 0);
    for (std::size_t k : sets.lu_lu[n]) linked[k] = 1;
    for (std::size_t k = n + 1; k < meas.n; ++k) {
      if (!linked[k]) spec.non_edge_lu_pairs.emplace_back(n, k);
    }
  }
  for (std::size_t n = 0; n < meas.n; ++n) {
    std::vector<char> linked(meas.m, 0);
    for (std::size_t a : sets.lu_anchor[n]) linked[a] = 1;
    for (std::size_t a = 0; a < meas.m; ++a) {
      if (!linked[a]) spec.non_edge_anchor_pairs.emplace_back(n, a);
    }
  }
  return spec;
}

/// Regularized relaxation:
///
///   minimize   sum_e t_e  -  kappa * sum_{non-edges} v^T D v
///   subject to t_e >= v_e^T D v_e - dbar_e^2
///              t_e >= dbar_e^2 - v_e^T D v_e
///              D[N:N+2, N:N+2] = I,  D PSD.
///
/// Scalar variable k is the epigraph variable of edge k.
inline ConicProblem assemble_problem(const MeasurementSet& meas, double kappa) {
  meas.validate();
  if (meas.edges.empty()) throw InvalidArgument("cannot assemble a problem with no edges");
  const RegularizerSpec reg = regularizer_spec(meas, kappa);

  const std::size_t n_unknown = meas.n;
  ConicProblem p;
  p.num_unknowns = n_unknown;
  p.psd_dim = n_unknown + 2;
  p.num_scalar_vars = meas.edges.size();
  p.kappa = kappa;

  auto selector_of = [&](const Edge& e) {
    return e.kind == EdgeKind::UnknownUnknown
               ? selector_lu(e.i, e.j, n_unknown)
               : selector_anchor(e.i, meas.anchors_reported[e.j], n_unknown);
  };

  for (std::size_t k = 0; k < meas.edges.size(); ++k) {
    const Edge& e = meas.edges[k];
    const LinearExpr q = quad_form_expr(selector_of(e));
    const double d2 = e.d_bar * e.d_bar;

    LinearConstraint upper;  // t - q >= -d^2
    upper.lhs.scalars.push_back({k, 1.0});
    for (const auto& t : q.entries) upper.lhs.entries.push_back({t.row, t.col, -t.coef});
    upper.sense = Sense::GreaterEqual;
    upper.rhs = -d2;

    LinearConstraint lower;  // t + q >= d^2
    lower.lhs.scalars.push_back({k, 1.0});
    lower.lhs.entries = q.entries;
    lower.sense = Sense::GreaterEqual;
    lower.rhs = d2;

    p.constraints.push_back(std::move(upper));
    p.constraints.push_back(std::move(lower));
    p.objective.scalars.push_back({k, 1.0});
  }

  if (kappa > 0.0) {
    detail::EntryMap acc;
    for (const auto& [n, k] : reg.non_edge_lu_pairs) {
      detail::accumulate_quad(acc, selector_lu(n, k, n_unknown), -kappa);
    }
    for (const auto& [n, a] : reg.non_edge_anchor_pairs) {
      detail::accumulate_quad(acc, selector_anchor(n, meas.anchors_reported[a], n_unknown), -kappa);
    }
    p.objective.entries = detail::to_terms(acc);
  }
  p.num_regularizer_terms = reg.non_edge_lu_pairs.size() + reg.non_edge_anchor_pairs.size();

  const std::size_t base = n_unknown;
  p.pinned = {{base, base, 1.0}, {base, base + 1, 0.0}, {base + 1, base + 1, 1.0}};
  for (const auto& pin : p.pinned) {
    LinearConstraint c;
    c.lhs.entries.push_back({pin.row, pin.col, 1.0});
    c.sense = Sense::Equal;
    c.rhs = pin.value;
    p.constraints.push_back(std::move(c));
  }
  return p;
}

}  // namespace wsnloc
