#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wsnloc/conic_solver.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/network.hpp"
#include "wsnloc/rss_sim.hpp"
#include "wsnloc/sdr.hpp"

namespace wsnloc {

/// Proposed: connectivity-weighted regularizer. Plain: kappa = 0.
enum class Method { Proposed, Plain };

inline const char* to_string(Method m) { return m == Method::Proposed ? "proposed" : "plain"; }

inline Method parse_method(std::string_view s) {
  if (s == "proposed") return Method::Proposed;
  if (s == "plain") return Method::Plain;
  throw InvalidArgument("unknown method '" + std::string(s) + "' (expected proposed or plain)");
}

struct LocalizationResult {
  std::vector<Point2> positions;
  double connectivity = 0.0;
  double kappa_used = 0.0;
  double objective = 0.0;
  double tightness = 0.0;
  Method method = Method::Proposed;
  SolveStatus status = SolveStatus::Failed;
  std::size_t iterations = 0;
};

/// Connectivity as seen from the measured edge list.
inline double measured_connectivity(const MeasurementSet& meas) {
  return connectivity_measure(neighbor_sets(meas), meas.n, meas.m);
}

/// Estimates unknown positions from reported anchors and measured distances only.
inline LocalizationResult localize(const MeasurementSet& meas, Method method,
                                   const SolverOptions& opts = {},
                                   const KappaSchedule& schedule = {}) {
  meas.validate();
  const NeighborSets sets = neighbor_sets(meas);
  if (!is_fully_connected(sets, meas.n, meas.m)) {
    throw DisconnectedNetwork("measurement graph is not connected");
  }

  LocalizationResult r;
  r.method = method;
  r.connectivity = connectivity_measure(sets, meas.n, meas.m);
  r.kappa_used = method == Method::Proposed ? weight_kappa(r.connectivity, schedule) : 0.0;

  const ConicProblem problem = assemble_problem(meas, r.kappa_used);
  const ConicSolution sol = solve(problem, opts);
  if (sol.status == SolveStatus::Failed) {
    throw SolverFailure("solver failed after " + std::to_string(sol.iterations) +
                        " iterations: " + sol.message +
                        " (pinf=" + std::to_string(sol.primal_infeasibility) +
                        ", dinf=" + std::to_string(sol.dual_infeasibility) +
                        ", gap=" + std::to_string(sol.relative_gap) + ")");
  }
  r.status = sol.status;
  r.iterations = sol.iterations;
  r.objective = sol.objective_value;
  r.positions = extract_positions(sol, meas.n);
  r.tightness = tightness(sol, meas.n);
  return r;
}

}  // namespace wsnloc
