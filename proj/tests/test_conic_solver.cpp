#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "support.hpp"
#include "wsnloc/conic_solver.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/rss_sim.hpp"
#include "wsnloc/sdr.hpp"

using namespace wsnloc;

namespace {

MeasurementSet trilateration() {
  return testsupport::exact_measurements({{0.3, 0.4}}, {{0, 0}, {1, 0}, {0, 1}}, 2.0);
}

MeasurementSet noisy_network(std::uint64_t seed, std::size_t n = 8, std::size_t m = 4) {
  ChannelParams p;
  p.d_max = 0.6;
  return simulate_trial(n, m, p, seed).measurements;
}

void expect_feasible(const ConicProblem& p, const ConicSolution& s, const SolverOptions& o) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.psd_block);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -o.feas_tol);
  EXPECT_LT((s.psd_block - s.psd_block.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const auto n = static_cast<Eigen::Index>(p.psd_dim);
  EXPECT_NEAR(s.psd_block(n - 2, n - 2), 1.0, o.feas_tol * 10);
  EXPECT_NEAR(s.psd_block(n - 1, n - 1), 1.0, o.feas_tol * 10);
  EXPECT_NEAR(s.psd_block(n - 2, n - 1), 0.0, o.feas_tol * 10);
  for (Eigen::Index k = 0; k < s.scalar_vars.size(); ++k) EXPECT_GE(s.scalar_vars[k], -o.feas_tol);
  for (const auto& c : p.constraints) {
    const double lhs = evaluate(c.lhs, s.scalar_vars, s.psd_block);
    const double slack_tol = 1e-6 * (1.0 + std::abs(c.rhs));
    if (c.sense == Sense::Equal) {
      EXPECT_NEAR(lhs, c.rhs, slack_tol);
    } else {
      EXPECT_GE(lhs, c.rhs - slack_tol);
    }
  }
}

}  // namespace

TEST(Solve, Trilateration) {
  const ConicSolution sol = solve(assemble_problem(trilateration(), 0.0));
  ASSERT_EQ(sol.status, SolveStatus::Optimal) << sol.message;
  const auto pos = extract_positions(sol, 1);
  ASSERT_EQ(pos.size(), 1u);
  EXPECT_NEAR(pos[0].x, 0.3, 1e-4);
  EXPECT_NEAR(pos[0].y, 0.4, 1e-4);
  EXPECT_LT(std::abs(tightness(sol, 1)), 1e-6);
  EXPECT_NEAR(sol.objective_value, 0.0, 1e-6);
}

TEST(Solve, HandBuiltSemidefiniteProgram) {
  // minimize D00 + D11 subject to D01 = 1, D PSD: optimum 2 at [[1,1],[1,1]].
  ConicProblem p;
  p.psd_dim = 2;
  p.objective.entries = {{0, 0, 1.0}, {1, 1, 1.0}};
  LinearConstraint c;
  c.lhs.entries = {{0, 1, 1.0}};
  c.rhs = 1.0;
  p.constraints = {c};
  const ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal) << sol.message;
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-6);
  EXPECT_NEAR(sol.psd_block(0, 0), 1.0, 1e-5);
  EXPECT_NEAR(sol.psd_block(1, 1), 1.0, 1e-5);
}

TEST(Solve, HandBuiltWithScalars) {
  // minimize t subject to t >= D00 - 2, t >= 2 - D00, D00 = 3 -> t = 1.
  ConicProblem p;
  p.psd_dim = 1;
  p.num_scalar_vars = 1;
  p.objective.scalars = {{0, 1.0}};
  LinearConstraint up, down, pin;
  up.lhs = {{{0, 1.0}}, {{0, 0, -1.0}}};
  up.sense = Sense::GreaterEqual;
  up.rhs = -2.0;
  down.lhs = {{{0, 1.0}}, {{0, 0, 1.0}}};
  down.sense = Sense::GreaterEqual;
  down.rhs = 2.0;
  pin.lhs.entries = {{0, 0, 1.0}};
  pin.rhs = 3.0;
  p.constraints = {up, down, pin};
  const ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal) << sol.message;
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-7);
  EXPECT_NEAR(sol.scalar_vars[0], 1.0, 1e-6);
}

TEST(Solve, ReportsInfeasible) {
  ConicProblem p;
  p.psd_dim = 1;
  LinearConstraint c;
  c.lhs.entries = {{0, 0, 1.0}};
  c.rhs = -1.0;
  p.constraints = {c};
  const ConicSolution sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::Failed);
  EXPECT_FALSE(sol.message.empty());
  EXPECT_THROW(require_solution(sol), SolverFailure);
  EXPECT_THROW(extract_positions(sol, 0), SolverFailure);
}

TEST(Solve, ReportsUnbounded) {
  ConicProblem p;
  p.psd_dim = 2;
  p.objective.entries = {{0, 0, -1.0}};
  LinearConstraint c;
  c.lhs.entries = {{1, 1, 1.0}};
  c.rhs = 1.0;
  p.constraints = {c};
  const ConicSolution sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::Failed);
  EXPECT_FALSE(sol.message.empty());
}

TEST(Solve, IterationLimit) {
  SolverOptions o;
  o.max_iter = 2;
  const ConicSolution sol = solve(assemble_problem(noisy_network(1), 0.0), o);
  EXPECT_EQ(sol.status, SolveStatus::Failed);
  EXPECT_NE(sol.message.find("iteration limit"), std::string::npos);
}

TEST(Solve, OptionsValidated) {
  const ConicProblem p = assemble_problem(trilateration(), 0.0);
  SolverOptions o;
  o.feas_tol = 0;
  EXPECT_THROW(solve(p, o), InvalidArgument);
  o = {};
  o.gap_tol = -1;
  EXPECT_THROW(solve(p, o), InvalidArgument);
  o = {};
  o.max_iter = 0;
  EXPECT_THROW(solve(p, o), InvalidArgument);
}

TEST(Solve, FeasibilityAndObjectiveConsistency) {
  const SolverOptions o;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MeasurementSet meas = noisy_network(seed);
    for (double kappa : {0.0, 0.01, 0.05}) {
      const ConicProblem p = assemble_problem(meas, kappa);
      const ConicSolution s = solve(p, o);
      if (s.status == SolveStatus::Failed) {
        // Only the regularized problem may be unbounded; the plain one never fails.
        EXPECT_GT(kappa, 0.0) << s.message;
        continue;
      }
      expect_feasible(p, s, o);
      const double recomputed = evaluate(p.objective, s.scalar_vars, s.psd_block);
      EXPECT_NEAR(recomputed, s.objective_value, 1e-6 * std::max(1.0, std::abs(recomputed)));
      if (kappa == 0.0) {
        EXPECT_GE(s.objective_value, -1e-7);
      }
      EXPECT_GE(tightness(s, meas.n), -o.feas_tol * 10);
    }
  }
}

TEST(Solve, ScaleEquivariance) {
  testsupport::Gen g(6);
  for (int trial = 0; trial < 4; ++trial) {
    const auto xs = g.points(3);
    const auto as = g.points(4);
    const auto base = testsupport::exact_measurements(xs, as, 2.0);
    const auto p1 = extract_positions(solve(assemble_problem(base, 0.0)), 3);
    for (double s : {0.1, 10.0}) {
      auto scaled = base;
      for (auto& a : scaled.anchors_reported) a = {a.x * s, a.y * s};
      for (auto& e : scaled.edges) e.d_bar *= s;
      scaled.d_max *= s;
      const ConicSolution sol = solve(assemble_problem(scaled, 0.0));
      ASSERT_NE(sol.status, SolveStatus::Failed) << sol.message;
      const auto ps = extract_positions(sol, 3);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(ps[i].x, s * p1[i].x, 1e-4 * s);
        EXPECT_NEAR(ps[i].y, s * p1[i].y, 1e-4 * s);
      }
    }
  }
}

TEST(Solve, Deterministic) {
  const ConicProblem p = assemble_problem(noisy_network(3, 12, 5), 0.01);
  const ConicSolution a = solve(p);
  const ConicSolution b = solve(p);
  EXPECT_EQ(a.status, b.status);
  EXPECT_NEAR(a.objective_value, b.objective_value, 1e-9);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Extract, ReadsBackKnownBlock) {
  testsupport::Gen g(12);
  const auto xs = g.points(5, -2, 2);
  ConicSolution s;
  s.status = SolveStatus::Optimal;
  s.psd_block = lifted_block(xs);
  EXPECT_EQ(extract_positions(s, 5), xs);
  EXPECT_NEAR(tightness(s, 5), 0.0, 1e-12);
  s.psd_block.topLeftCorner(5, 5) += Eigen::MatrixXd::Identity(5, 5);
  EXPECT_NEAR(tightness(s, 5), 5.0, 1e-12);
  EXPECT_THROW(extract_positions(s, 4), InvalidArgument);
}

TEST(Extract, SingleUnknown) {
  ConicSolution s;
  s.status = SolveStatus::NearOptimal;
  s.psd_block = lifted_block({{0.25, -1.5}});
  const auto pos = extract_positions(s, 1);
  ASSERT_EQ(pos.size(), 1u);
  EXPECT_EQ(pos[0], (Point2{0.25, -1.5}));
}

TEST(StatusNames, Strings) {
  EXPECT_STREQ(to_string(SolveStatus::Optimal), "optimal");
  EXPECT_STREQ(to_string(SolveStatus::NearOptimal), "near-optimal");
  EXPECT_STREQ(to_string(SolveStatus::Failed), "failed");
}
