#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/estimator.hpp"
#include "wsnloc/rss_sim.hpp"

namespace wsnloc {

// ---------------------------------------------------------------------------
// Error metrics
// ---------------------------------------------------------------------------

/// sqrt(sum_n |est_n - truth_n|^2) for one trial.
inline double trial_error(std::span<const Point2> est, std::span<const Point2> truth) {
  if (est.size() != truth.size()) throw InvalidArgument("trial_error: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) sum += squared_distance(est[i], truth[i]);
  return std::sqrt(sum);
}

inline double rmse(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("rmse of an empty list");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;  // ascending
};

/// Linear interpolation between order statistics at zero-based position p*(n-1).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty list");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Quartiles, 1.5*IQR whiskers and the points beyond them.
inline BoxStats boxplot_stats(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("boxplot_stats of an empty list");
  std::vector<double> v(errors.begin(), errors.end());
  std::sort(v.begin(), v.end());

  BoxStats b;
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;

  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  bool have_inlier = false;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
      continue;
    }
    if (!have_inlier) {
      b.whisker_lo = x;
      have_inlier = true;
    }
    b.whisker_hi = x;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

enum class SweptParameter { M, DMax, SigmaDb, Epsilon };

inline const char* to_string(SweptParameter p) {
  switch (p) {
    case SweptParameter::M: return "M";
    case SweptParameter::DMax: return "d_max";
    case SweptParameter::SigmaDb: return "sigma_dB";
    case SweptParameter::Epsilon: return "epsilon";
  }
  return "?";
}

inline SweptParameter parse_swept_parameter(std::string_view s) {
  if (s == "M" || s == "m") return SweptParameter::M;
  if (s == "d_max" || s == "dmax") return SweptParameter::DMax;
  if (s == "sigma_dB" || s == "sigma_db" || s == "sigma-db") return SweptParameter::SigmaDb;
  if (s == "epsilon" || s == "eps") return SweptParameter::Epsilon;
  throw InvalidArgument("unknown swept parameter '" + std::string(s) + "'");
}

struct ExperimentConfig {
  std::string name = "experiment";
  SweptParameter swept = SweptParameter::SigmaDb;
  std::vector<double> sweep_values{3.5};
  ChannelParams fixed;
  std::size_t n_unknown = 15;
  std::size_t n_anchor = 5;
  std::size_t trials = 50;
  std::uint64_t base_seed = 1;
  std::vector<Method> methods{Method::Proposed, Method::Plain};
  SolverOptions solver;
  std::size_t jobs = 1;

  void validate() const {
    detail::require(trials >= 1, "trials must be at least 1");
    detail::require(!sweep_values.empty(), "sweep_values must be nonempty");
    detail::require(!methods.empty(), "at least one method is required");
    detail::require(n_unknown >= 1, "N must be at least 1");
    detail::require(n_anchor >= 1, "M must be at least 1");
    detail::require(jobs >= 1, "jobs must be at least 1");
    detail::require(!name.empty() && name.find_first_of(",\r\n") == std::string::npos,
                    "experiment name must be nonempty and free of commas and newlines");
    fixed.validate();
    solver.validate();
    for (double v : sweep_values) {
      ChannelParams p = params_at(v);
      p.validate();
      if (swept == SweptParameter::M) {
        detail::require(v >= 1.0 && v == std::floor(v), "swept M values must be positive integers");
      }
    }
  }

  [[nodiscard]] ChannelParams params_at(double value) const {
    ChannelParams p = fixed;
    switch (swept) {
      case SweptParameter::DMax: p.d_max = value; break;
      case SweptParameter::SigmaDb: p.sigma_db = value; break;
      case SweptParameter::Epsilon: p.epsilon = value; break;
      case SweptParameter::M: break;
    }
    return p;
  }

  [[nodiscard]] std::size_t anchors_at(double value) const {
    return swept == SweptParameter::M ? static_cast<std::size_t>(value) : n_anchor;
  }
};

struct TrialRecord {
  std::size_t trial = 0;
  double error = std::numeric_limits<double>::quiet_NaN();  // NaN when the trial failed
  double connectivity = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double tightness = std::numeric_limits<double>::quiet_NaN();
  std::string status;
  std::string message;

  [[nodiscard]] bool ok() const { return status == "optimal" || status == "near-optimal"; }
};

struct ReportRow {
  std::size_t setting_index = 0;
  double setting = 0.0;
  Method method = Method::Proposed;
  std::vector<TrialRecord> trials;
  // Aggregates over successful trials; NaN when none succeeded.
  double rmse = std::numeric_limits<double>::quiet_NaN();
  BoxStats box;
  std::size_t n_failed = 0;
};

struct ExperimentReport {
  std::string name;
  SweptParameter swept = SweptParameter::SigmaDb;
  std::vector<ReportRow> rows;  // setting-major, then method in config order
};

/// Seed of trial `trial` at sweep position `setting_index`.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t setting_index,
                                std::size_t trial) {
  return mix_seed(mix_seed(base_seed, setting_index), trial);
}

namespace detail {

inline TrialRecord failed_record(std::size_t trial, std::string status, std::string message) {
  TrialRecord r;
  r.trial = trial;
  r.status = std::move(status);
  r.message = std::move(message);
  return r;
}

// Runs every method on one shared measurement realization.
inline std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, std::size_t setting_index,
                                          std::size_t trial) {
  const double value = cfg.sweep_values[setting_index];
  const ChannelParams params = cfg.params_at(value);
  const std::size_t n_anchor = cfg.anchors_at(value);
  const std::uint64_t seed = trial_seed(cfg.base_seed, setting_index, trial);

  std::vector<TrialRecord> out;
  SimulatedTrial sim;
  try {
    sim = simulate_trial(cfg.n_unknown, n_anchor, params, seed);
  } catch (const std::exception& e) {
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
      out.push_back(failed_record(trial, "generation-failed", e.what()));
    }
    return out;
  }

  const Scenario& scenario = sim.scenario;
  const MeasurementSet& meas = sim.measurements;
  for (Method method : cfg.methods) {
    try {
      const LocalizationResult res = localize(meas, method, cfg.solver);
      TrialRecord r;
      r.trial = trial;
      r.error = trial_error(res.positions, scenario.unknowns);
      r.connectivity = res.connectivity;
      r.kappa = res.kappa_used;
      r.tightness = res.tightness;
      r.status = to_string(res.status);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      TrialRecord r = failed_record(trial, "failed", e.what());
      r.connectivity = measured_connectivity(meas);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace detail

/// Paired Monte-Carlo sweep. Output depends only on cfg, not on cfg.jobs.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_settings = cfg.sweep_values.size();
  const std::size_t n_items = n_settings * cfg.trials;
  std::vector<std::vector<TrialRecord>> results(n_items);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t item = next++; item < n_items; item = next++) {
      results[item] = detail::run_trial(cfg, item / cfg.trials, item % cfg.trials);
    }
  };
  const std::size_t workers = std::min(cfg.jobs, n_items);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentReport report;
  report.name = cfg.name;
  report.swept = cfg.swept;
  for (std::size_t s = 0; s < n_settings; ++s) {
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
      ReportRow row;
      row.setting_index = s;
      row.setting = cfg.sweep_values[s];
      row.method = cfg.methods[k];
      std::vector<double> ok;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        TrialRecord rec = results[s * cfg.trials + t][k];
        if (rec.ok()) {
          ok.push_back(rec.error);
        } else {
          ++row.n_failed;
        }
        row.trials.push_back(std::move(rec));
      }
      if (!ok.empty()) {
        row.rmse = rmse(ok);
        row.box = boxplot_stats(ok);
      } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.box = {nan, nan, nan, nan, nan, {}};
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr std::string_view kTrialsCsvHeader =
    "experiment,setting,method,trial,E_i,C,kappa,tightness,status";
inline constexpr std::string_view kSummaryCsvHeader =
    "experiment,setting,method,rmse,median,q1,q3,n_outliers,n_failed";

inline std::string trials_csv(const ExperimentReport& report) {
  std::string out(kTrialsCsvHeader);
  out += '\n';
  for (const auto& row : report.rows) {
    for (const auto& t : row.trials) {
      out += report.name + ',' + format_number(row.setting) + ',' + to_string(row.method) + ',' +
             std::to_string(t.trial) + ',' + format_number(t.error) + ',' +
             format_number(t.connectivity) + ',' + format_number(t.kappa) + ',' +
             format_number(t.tightness) + ',' + t.status + '\n';
    }
  }
  return out;
}

inline std::string summary_csv(const ExperimentReport& report) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const auto& row : report.rows) {
    out += report.name + ',' + format_number(row.setting) + ',' + to_string(row.method) + ',' +
           format_number(row.rmse) + ',' + format_number(row.box.median) + ',' +
           format_number(row.box.q1) + ',' + format_number(row.box.q3) + ',' +
           std::to_string(row.box.outliers.size()) + ',' + std::to_string(row.n_failed) + '\n';
  }
  return out;
}

}  // namespace wsnloc
