#pragma once

// Primal-dual interior-point solver for problems with one PSD block and a
// non-negative orthant, as produced by assemble_problem().
//
// Internally the problem is brought to the standard form
//
//   minimize <C, X> + c^T x   s.t.  <A_i, X> + a_i^T x = b_i,  X PSD, x >= 0
//
// by appending one non-negative slack per inequality. Search directions use
// Nesterov-Todd scaling with a Mehrotra predictor-corrector; the start is
// infeasible and scaled from the data.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/geometry.hpp"
#include "wsnloc/sdr.hpp"

namespace wsnloc {

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  std::size_t max_iter = 200;
  // A run that stalls with all residuals within this multiple of the
  // tolerances is reported as near-optimal instead of failed.
  double near_optimal_factor = 1e3;

  void validate() const {
    detail::require(feas_tol > 0.0, "feas_tol must be positive");
    detail::require(gap_tol > 0.0, "gap_tol must be positive");
    detail::require(max_iter > 0, "max_iter must be positive");
    detail::require(near_optimal_factor >= 1.0, "near_optimal_factor must be >= 1");
  }
};

enum class SolveStatus { Optimal, NearOptimal, Failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near-optimal";
    case SolveStatus::Failed: return "failed";
  }
  return "failed";
}

struct ConicSolution {
  SolveStatus status = SolveStatus::Failed;
  double objective_value = 0.0;
  Eigen::MatrixXd psd_block;
  Eigen::VectorXd scalar_vars;

  std::size_t iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  std::string message;
};

namespace detail {

struct SymEntry {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  double v = 0.0;
};

using SparseRow = std::vector<std::pair<Eigen::Index, double>>;

struct StandardForm {
  Eigen::Index n = 0;           // PSD block dimension
  Eigen::Index p = 0;           // orthant dimension (scalars + slacks)
  Eigen::Index m = 0;           // equality count
  Eigen::Index num_scalar = 0;  // leading orthant entries that are problem scalars
  std::vector<std::vector<SymEntry>> a_psd;  // full symmetric pattern per row
  std::vector<SparseRow> a_lp;
  std::vector<SparseRow> lp_cols;  // transpose of a_lp
  Eigen::VectorXd b;
  Eigen::VectorXd c_lp;
  Eigen::MatrixXd c_psd;
};

inline std::vector<SymEntry> symmetric_entries(const std::vector<MatrixTerm>& terms,
                                               std::size_t dim) {
  std::map<std::pair<std::size_t, std::size_t>, double> acc;
  for (const auto& t : terms) {
    require(t.row < dim && t.col < dim, "PSD entry index out of range");
    const auto key = std::minmax(t.row, t.col);
    acc[{key.first, key.second}] += t.coef;
  }
  std::vector<SymEntry> out;
  for (const auto& [key, coef] : acc) {
    if (coef == 0.0) continue;
    const auto r = static_cast<Eigen::Index>(key.first);
    const auto c = static_cast<Eigen::Index>(key.second);
    if (r == c) {
      out.push_back({r, r, coef});
    } else {
      out.push_back({r, c, 0.5 * coef});
      out.push_back({c, r, 0.5 * coef});
    }
  }
  return out;
}

inline StandardForm to_standard_form(const ConicProblem& prob) {
  require(prob.psd_dim >= 1, "problem needs a PSD block");
  require(!prob.constraints.empty(), "problem has no constraints");

  StandardForm sf;
  sf.n = static_cast<Eigen::Index>(prob.psd_dim);
  sf.m = static_cast<Eigen::Index>(prob.constraints.size());
  sf.num_scalar = static_cast<Eigen::Index>(prob.num_scalar_vars);
  Eigen::Index slacks = 0;
  for (const auto& c : prob.constraints) slacks += c.sense == Sense::GreaterEqual ? 1 : 0;
  sf.p = sf.num_scalar + slacks;

  sf.b.resize(sf.m);
  sf.a_psd.resize(static_cast<std::size_t>(sf.m));
  sf.a_lp.resize(static_cast<std::size_t>(sf.m));
  sf.lp_cols.resize(static_cast<std::size_t>(sf.p));

  Eigen::Index next_slack = sf.num_scalar;
  for (Eigen::Index i = 0; i < sf.m; ++i) {
    const auto& con = prob.constraints[static_cast<std::size_t>(i)];
    require(std::isfinite(con.rhs), "non-finite constraint right-hand side");
    sf.b[i] = con.rhs;
    sf.a_psd[static_cast<std::size_t>(i)] = symmetric_entries(con.lhs.entries, prob.psd_dim);
    std::map<Eigen::Index, double> lp;
    for (const auto& t : con.lhs.scalars) {
      require(t.var < prob.num_scalar_vars, "scalar variable index out of range");
      lp[static_cast<Eigen::Index>(t.var)] += t.coef;
    }
    if (con.sense == Sense::GreaterEqual) lp[next_slack++] = -1.0;
    for (const auto& [k, v] : lp) {
      if (v == 0.0) continue;
      sf.a_lp[static_cast<std::size_t>(i)].emplace_back(k, v);
      sf.lp_cols[static_cast<std::size_t>(k)].emplace_back(i, v);
    }
  }

  sf.c_lp = Eigen::VectorXd::Zero(sf.p);
  for (const auto& t : prob.objective.scalars) {
    require(t.var < prob.num_scalar_vars, "objective scalar index out of range");
    sf.c_lp[static_cast<Eigen::Index>(t.var)] += t.coef;
  }
  sf.c_psd = Eigen::MatrixXd::Zero(sf.n, sf.n);
  for (const auto& e : symmetric_entries(prob.objective.entries, prob.psd_dim)) {
    sf.c_psd(e.r, e.c) += e.v;
  }
  return sf;
}

class InteriorPoint {
 public:
  InteriorPoint(const StandardForm& sf, const SolverOptions& opts) : sf_(sf), opts_(opts) {}

  ConicSolution run(const ConicProblem& prob) {
    initialize();
    ConicSolution out;
    const double b_norm = sf_.b.norm();
    const double c_norm = std::sqrt(sf_.c_psd.squaredNorm() + sf_.c_lp.squaredNorm());
    const double n_total = static_cast<double>(sf_.n + sf_.p);

    double pinf = 0.0, dinf = 0.0, relgap = 0.0;
    std::size_t stalls = 0;
    std::string why;
    std::size_t iter = 0;
    for (;; ++iter) {
      const Eigen::VectorXd rp = sf_.b - apply(x_psd_, x_lp_);
      const Eigen::MatrixXd rd_psd = sf_.c_psd - adjoint_psd(y_) - z_psd_;
      const Eigen::VectorXd rd_lp = sf_.c_lp - adjoint_lp(y_) - z_lp_;

      const double pobj = (sf_.c_psd.cwiseProduct(x_psd_)).sum() + sf_.c_lp.dot(x_lp_);
      const double dobj = sf_.b.dot(y_);
      const double compl_gap = (x_psd_.cwiseProduct(z_psd_)).sum() + x_lp_.dot(z_lp_);
      pinf = rp.norm() / (1.0 + b_norm);
      dinf = std::sqrt(rd_psd.squaredNorm() + rd_lp.squaredNorm()) / (1.0 + c_norm);
      relgap = std::max(compl_gap, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (pinf <= opts_.feas_tol && dinf <= opts_.feas_tol && relgap <= opts_.gap_tol) {
        out.status = SolveStatus::Optimal;
        break;
      }
      if (!std::isfinite(pobj) || !std::isfinite(dobj)) {
        why = "numerical breakdown (non-finite objective)";
        break;
      }
      if (x_psd_.norm() > 1e10 || pobj < -1e10) {
        why = "objective appears unbounded below";
        break;
      }
      if (dobj > 1e10 || y_.norm() > 1e12) {
        why = "problem appears infeasible";
        break;
      }
      if (iter >= opts_.max_iter) {
        why = "iteration limit reached";
        break;
      }

      const double mu = compl_gap / n_total;
      if (!compute_scaling()) {
        why = "numerical breakdown (iterate lost definiteness)";
        break;
      }
      if (!factor_schur()) {
        why = "numerical breakdown (Schur complement not factorizable)";
        break;
      }

      // Predictor.
      const Eigen::MatrixXd v_sq = v_.array().square().matrix().asDiagonal();
      Direction aff = direction(rp, rd_psd, rd_lp, -v_sq, -x_lp_.cwiseProduct(z_lp_));
      const double ap_aff = std::min(1.0, max_step(x_psd_, aff.dx_psd, x_lp_, aff.dx_lp));
      const double ad_aff = std::min(1.0, max_step(z_psd_, aff.dz_psd, z_lp_, aff.dz_lp));
      const double mu_aff =
          (((x_psd_ + ap_aff * aff.dx_psd).cwiseProduct(z_psd_ + ad_aff * aff.dz_psd)).sum() +
           (x_lp_ + ap_aff * aff.dx_lp).dot(z_lp_ + ad_aff * aff.dz_lp)) /
          n_total;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      // Corrector, with the second-order term taken in the scaled space.
      const Eigen::MatrixXd cross = aff.dx_scaled * aff.dz_scaled;
      const Eigen::MatrixXd rc_psd = sigma * mu * Eigen::MatrixXd::Identity(sf_.n, sf_.n) - v_sq -
                                     0.5 * (cross + cross.transpose());
      const Eigen::VectorXd rc_lp = Eigen::VectorXd::Constant(sf_.p, sigma * mu) -
                                    x_lp_.cwiseProduct(z_lp_) - aff.dx_lp.cwiseProduct(aff.dz_lp);
      Direction dir = direction(rp, rd_psd, rd_lp, rc_psd, rc_lp);

      const double ap_max = max_step(x_psd_, dir.dx_psd, x_lp_, dir.dx_lp);
      const double ad_max = max_step(z_psd_, dir.dz_psd, z_lp_, dir.dz_lp);
      const double gamma = 0.9 + 0.09 * std::min({1.0, ap_max, ad_max});
      double ap = std::min(1.0, gamma * ap_max);
      double ad = std::min(1.0, gamma * ad_max);
      if (!std::isfinite(ap) || !std::isfinite(ad)) {
        why = "numerical breakdown (non-finite step)";
        break;
      }

      // Roundoff can put the boundary step slightly outside the cone; back off.
      Eigen::MatrixXd x_next = x_psd_ + ap * dir.dx_psd;
      Eigen::MatrixXd z_next = z_psd_ + ad * dir.dz_psd;
      int backtracks = 0;
      while (Eigen::LLT<Eigen::MatrixXd>(x_next).info() != Eigen::Success && backtracks < 30) {
        ap *= 0.8;
        x_next = x_psd_ + ap * dir.dx_psd;
        ++backtracks;
      }
      while (Eigen::LLT<Eigen::MatrixXd>(z_next).info() != Eigen::Success && backtracks < 60) {
        ad *= 0.8;
        z_next = z_psd_ + ad * dir.dz_psd;
        ++backtracks;
      }
      if (backtracks >= 30 && (Eigen::LLT<Eigen::MatrixXd>(x_next).info() != Eigen::Success ||
                               Eigen::LLT<Eigen::MatrixXd>(z_next).info() != Eigen::Success)) {
        why = "numerical breakdown (iterate left the cone)";
        break;
      }
      x_psd_ = 0.5 * (x_next + x_next.transpose());
      z_psd_ = 0.5 * (z_next + z_next.transpose());
      x_lp_ += ap * dir.dx_lp;
      z_lp_ += ad * dir.dz_lp;
      y_ += ad * dir.dy;

      if (std::max(ap, ad) < 1e-10) {
        if (++stalls >= 5) {
          why = "step length stalled";
          break;
        }
      } else {
        stalls = 0;
      }
    }

    out.iterations = iter;
    out.primal_infeasibility = pinf;
    out.dual_infeasibility = dinf;
    out.relative_gap = relgap;
    if (out.status != SolveStatus::Optimal) {
      const double f = opts_.near_optimal_factor;
      const bool close = pinf <= f * opts_.feas_tol && dinf <= f * opts_.feas_tol &&
                         relgap <= f * opts_.gap_tol;
      out.status = close ? SolveStatus::NearOptimal : SolveStatus::Failed;
      out.message = why;
    }
    out.psd_block = x_psd_;
    out.scalar_vars = x_lp_.head(sf_.num_scalar);
    out.objective_value = evaluate(prob.objective, out.scalar_vars, out.psd_block);
    return out;
  }

 private:
  struct Direction {
    Eigen::MatrixXd dx_psd, dz_psd;
    Eigen::MatrixXd dx_scaled, dz_scaled;
    Eigen::VectorXd dx_lp, dz_lp, dy;
  };

  void initialize() {
    double max_ratio = 0.0;
    double max_a = 0.0;
    for (Eigen::Index i = 0; i < sf_.m; ++i) {
      double sq = 0.0;
      for (const auto& e : sf_.a_psd[static_cast<std::size_t>(i)]) sq += e.v * e.v;
      for (const auto& [k, v] : sf_.a_lp[static_cast<std::size_t>(i)]) sq += v * v;
      const double a_norm = std::sqrt(sq);
      max_a = std::max(max_a, a_norm);
      max_ratio = std::max(max_ratio, (1.0 + std::abs(sf_.b[i])) / (1.0 + a_norm));
    }
    const double c_norm = std::sqrt(sf_.c_psd.squaredNorm() + sf_.c_lp.squaredNorm());
    const double dim = static_cast<double>(std::max(sf_.n, sf_.p));
    const double xi = std::max({10.0, std::sqrt(dim), dim * max_ratio});
    const double eta = std::max({10.0, std::sqrt(dim), 1.0 + max_a, 1.0 + c_norm});

    x_psd_ = xi * Eigen::MatrixXd::Identity(sf_.n, sf_.n);
    z_psd_ = eta * Eigen::MatrixXd::Identity(sf_.n, sf_.n);
    x_lp_ = Eigen::VectorXd::Constant(sf_.p, xi);
    z_lp_ = Eigen::VectorXd::Constant(sf_.p, eta);
    y_ = Eigen::VectorXd::Zero(sf_.m);
  }

  // <A_i, W> + a_i^T w. W need not be symmetric: A_i is, so only sym(W) counts.
  Eigen::VectorXd apply(const Eigen::MatrixXd& w_psd, const Eigen::VectorXd& w_lp) const {
    Eigen::VectorXd out(sf_.m);
    for (Eigen::Index i = 0; i < sf_.m; ++i) {
      double s = 0.0;
      for (const auto& e : sf_.a_psd[static_cast<std::size_t>(i)]) s += e.v * w_psd(e.r, e.c);
      for (const auto& [k, v] : sf_.a_lp[static_cast<std::size_t>(i)]) s += v * w_lp[k];
      out[i] = s;
    }
    return out;
  }

  Eigen::MatrixXd adjoint_psd(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sf_.n, sf_.n);
    for (Eigen::Index i = 0; i < sf_.m; ++i) {
      for (const auto& e : sf_.a_psd[static_cast<std::size_t>(i)]) out(e.r, e.c) += y[i] * e.v;
    }
    return out;
  }

  Eigen::VectorXd adjoint_lp(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sf_.p);
    for (Eigen::Index i = 0; i < sf_.m; ++i) {
      for (const auto& [k, v] : sf_.a_lp[static_cast<std::size_t>(i)]) out[k] += y[i] * v;
    }
    return out;
  }

  // NT scaling point: W = G G^T with W Z W = X and G^T Z G = G^{-1} X G^{-T} = diag(v).
  bool compute_scaling() {
    Eigen::LLT<Eigen::MatrixXd> x_chol(x_psd_);
    Eigen::LLT<Eigen::MatrixXd> z_chol(z_psd_);
    if (x_chol.info() != Eigen::Success || z_chol.info() != Eigen::Success) return false;
    const Eigen::MatrixXd lx = x_chol.matrixL();
    const Eigen::MatrixXd lz = z_chol.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(lz.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    v_ = svd.singularValues();
    if (!(v_.minCoeff() > 0.0) || !v_.allFinite()) return false;
    const Eigen::VectorXd root = v_.cwiseSqrt();
    g_ = lx * svd.matrixV() * root.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd lx_inv = lx.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(sf_.n, sf_.n));
    g_inv_ = root.asDiagonal() * svd.matrixV().transpose() * lx_inv;
    w_ = g_ * g_.transpose();
    w_ = 0.5 * (w_ + w_.transpose()).eval();
    return true;
  }

  // M_ij = tr(A_i W A_j W) + sum_k a_ik a_jk x_k / z_k.
  bool factor_schur() {
    const Eigen::Index m = sf_.m;
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& ai = sf_.a_psd[static_cast<std::size_t>(i)];
      if (ai.empty()) continue;
      for (Eigen::Index j = i; j < m; ++j) {
        const auto& aj = sf_.a_psd[static_cast<std::size_t>(j)];
        double s = 0.0;
        for (const auto& e : ai) {
          for (const auto& f : aj) s += e.v * f.v * w_(e.c, f.r) * w_(f.c, e.r);
        }
        schur(i, j) = s;
      }
    }
    for (Eigen::Index k = 0; k < sf_.p; ++k) {
      const double w = x_lp_[k] / z_lp_[k];
      const auto& col = sf_.lp_cols[static_cast<std::size_t>(k)];
      for (const auto& [i, a] : col) {
        for (const auto& [j, b] : col) {
          if (j >= i) schur(i, j) += a * b * w;
        }
      }
    }
    schur.triangularView<Eigen::StrictlyLower>() = schur.transpose().triangularView<Eigen::StrictlyLower>();

    schur_chol_.compute(schur);
    if (schur_chol_.info() == Eigen::Success) return true;
    const double shift = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
    schur.diagonal().array() += shift;
    schur_chol_.compute(schur);
    return schur_chol_.info() == Eigen::Success;
  }

  // Newton step for the residuals (rp, rd) and the scaled complementarity
  // target v o (dX~ + dZ~) = rc, where o is the Jordan product.
  Direction direction(const Eigen::VectorXd& rp, const Eigen::MatrixXd& rd_psd,
                      const Eigen::VectorXd& rd_lp, const Eigen::MatrixXd& rc_psd,
                      const Eigen::VectorXd& rc_lp) const {
    Eigen::MatrixXd h(sf_.n, sf_.n);
    for (Eigen::Index i = 0; i < sf_.n; ++i) {
      for (Eigen::Index j = 0; j < sf_.n; ++j) h(i, j) = 2.0 * rc_psd(i, j) / (v_[i] + v_[j]);
    }
    const Eigen::MatrixXd ghg = g_ * h * g_.transpose();
    const Eigen::VectorXd g_lp = (rc_lp - x_lp_.cwiseProduct(rd_lp)).cwiseQuotient(z_lp_);
    Eigen::VectorXd rhs = rp - apply(ghg - w_ * rd_psd * w_, g_lp);

    Direction d;
    d.dy = schur_chol_.solve(rhs);
    d.dz_psd = rd_psd - adjoint_psd(d.dy);
    d.dz_psd = 0.5 * (d.dz_psd + d.dz_psd.transpose()).eval();
    d.dz_lp = rd_lp - adjoint_lp(d.dy);
    const Eigen::MatrixXd dx = ghg - w_ * d.dz_psd * w_;
    d.dx_psd = 0.5 * (dx + dx.transpose());
    d.dx_lp = (rc_lp - x_lp_.cwiseProduct(d.dz_lp)).cwiseQuotient(z_lp_);
    d.dx_scaled = g_inv_ * d.dx_psd * g_inv_.transpose();
    d.dz_scaled = g_.transpose() * d.dz_psd * g_;
    return d;
  }

  static double max_step(const Eigen::MatrixXd& s, const Eigen::MatrixXd& ds,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = std::numeric_limits<double>::infinity();
    Eigen::LLT<Eigen::MatrixXd> chol(s);
    if (chol.info() != Eigen::Success) return 0.0;
    const Eigen::MatrixXd l_inv_ds = chol.matrixL().solve(ds);
    Eigen::MatrixXd w = chol.matrixL().solve(l_inv_ds.transpose());
    w = 0.5 * (w + w.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()[0];
    if (lmin < 0.0) alpha = -1.0 / lmin;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (dv[k] < 0.0) alpha = std::min(alpha, -v[k] / dv[k]);
    }
    return alpha;
  }

  const StandardForm& sf_;
  SolverOptions opts_;
  Eigen::MatrixXd x_psd_, z_psd_;
  Eigen::MatrixXd g_, g_inv_, w_;
  Eigen::VectorXd v_;
  Eigen::VectorXd x_lp_, z_lp_, y_;
  Eigen::LLT<Eigen::MatrixXd> schur_chol_;
};

}  // namespace detail

inline ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts = {}) {
  opts.validate();
  const detail::StandardForm sf = detail::to_standard_form(problem);
  detail::InteriorPoint ipm(sf, opts);
  return ipm.run(problem);
}

inline void require_solution(const ConicSolution& sol) {
  if (sol.status == SolveStatus::Failed) {
    throw SolverFailure("conic solve failed: " + sol.message);
  }
}

/// Column n of the X block, i.e. D(N, n) and D(N+1, n).
inline std::vector<Point2> extract_positions(const ConicSolution& sol, std::size_t n_unknown) {
  require_solution(sol);
  const auto n = static_cast<Eigen::Index>(n_unknown);
  detail::require(sol.psd_block.rows() == n + 2 && sol.psd_block.cols() == n + 2,
                  "solution block does not match the unknown count");
  std::vector<Point2> out;
  out.reserve(n_unknown);
  for (Eigen::Index i = 0; i < n; ++i) out.push_back({sol.psd_block(n, i), sol.psd_block(n + 1, i)});
  return out;
}

/// trace(Y - X^T X); zero when the relaxation is rank-consistent.
inline double tightness(const ConicSolution& sol, std::size_t n_unknown) {
  require_solution(sol);
  const auto n = static_cast<Eigen::Index>(n_unknown);
  detail::require(sol.psd_block.rows() == n + 2 && sol.psd_block.cols() == n + 2,
                  "solution block does not match the unknown count");
  const Eigen::MatrixXd x = sol.psd_block.bottomLeftCorner(2, n);
  return sol.psd_block.topLeftCorner(n, n).trace() - x.squaredNorm();
}

}  // namespace wsnloc
