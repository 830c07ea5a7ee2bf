#pragma once

// Command-line front end: gen, solve, bench, plot.

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wsnloc/bench.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/estimator.hpp"
#include "wsnloc/io.hpp"
#include "wsnloc/rss_sim.hpp"
#include "wsnloc/sdr.hpp"
#include "wsnloc/svg.hpp"

namespace wsnloc::cli {

inline constexpr const char* kJobsEnv = "WSNLOC_JOBS";

struct CliConfig {
  std::size_t n = 15;
  std::size_t m = 5;
  ChannelParams params;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::string method = "proposed";
  std::string in_path;
  std::string out_path;
  std::string config_path;
  std::string dump_problem_path;
  std::size_t jobs = 1;
};

namespace detail {

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

inline std::optional<std::size_t> jobs_from_env() {
  const char* v = std::getenv(kJobsEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  const std::string s(v);
  if (s.find_first_not_of("0123456789") != std::string::npos || std::stoull(s) == 0) {
    throw InvalidArgument(std::string(kJobsEnv) + " must be a positive integer");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

inline int run_gen(const CliConfig& c, std::ostream& out) {
  const SimulatedTrial t = simulate_trial(c.n, c.m, c.params, c.seed);
  Json doc;
  doc["scenario"] = to_json(t.scenario);
  doc["measurements"] = to_json(t.measurements);
  emit(c.out_path, dump(doc), out);
  return 0;
}

inline int run_solve(const CliConfig& c, std::ostream& out) {
  if (c.in_path.empty()) throw InvalidArgument("solve needs --in");
  const MeasurementSet meas = load_measurements(c.in_path);
  const Method method = parse_method(c.method);
  if (!c.dump_problem_path.empty()) {
    const double kappa = method == Method::Proposed ? weight_kappa(measured_connectivity(meas)) : 0.0;
    write_file(c.dump_problem_path, dump(to_json(assemble_problem(meas, kappa))));
  }
  const LocalizationResult r = localize(meas, method);
  emit(c.out_path, dump(to_json(r)), out);
  return 0;
}

inline int run_bench(const CliConfig& c, const CLI::App& cmd, std::ostream& out) {
  ExperimentConfig cfg;
  if (!c.config_path.empty()) cfg = parse_experiment_config(read_file(c.config_path), cfg);
  auto given = [&](const char* flag) { return cmd.get_option(flag)->count() > 0; };
  if (given("--n")) cfg.n_unknown = c.n;
  if (given("--m")) cfg.n_anchor = c.m;
  if (given("--gamma-p")) cfg.fixed.gamma_p = c.params.gamma_p;
  if (given("--sigma-db")) cfg.fixed.sigma_db = c.params.sigma_db;
  if (given("--eps")) cfg.fixed.epsilon = c.params.epsilon;
  if (given("--dmax")) cfg.fixed.d_max = c.params.d_max;
  if (given("--trials")) cfg.trials = c.trials;
  if (given("--seed")) cfg.base_seed = c.seed;
  if (given("--method")) {
    cfg.methods.clear();
    for (const auto& s : wsnloc::detail::split_list(c.method)) cfg.methods.push_back(parse_method(s));
  }
  if (given("--jobs")) {
    cfg.jobs = c.jobs;
  } else if (auto env = jobs_from_env()) {
    cfg.jobs = *env;
  }
  if (c.out_path.empty()) throw InvalidArgument("bench needs --out <directory>");

  const ExperimentReport report = run_experiment(cfg);
  std::filesystem::create_directories(c.out_path);
  const std::filesystem::path dir(c.out_path);
  write_file((dir / "trials.csv").string(), trials_csv(report));
  write_file((dir / "summary.csv").string(), summary_csv(report));
  std::size_t failed = 0;
  for (const auto& row : report.rows) failed += row.n_failed;
  out << "wrote " << (dir / "trials.csv").string() << " and " << (dir / "summary.csv").string()
      << " (" << report.rows.size() << " rows, " << failed << " failed trials)\n";
  return 0;
}

inline int run_plot(const CliConfig& c, std::ostream& out) {
  if (c.in_path.empty()) throw InvalidArgument("plot needs --in <summary.csv>");
  const auto rows = parse_summary_csv(read_file(c.in_path));
  emit(c.out_path, render_svg(rows), out);
  return 0;
}

}  // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Sensor-network localization by regularized semidefinite relaxation"};
  app.name("wsnloc");
  app.require_subcommand(1);

  auto add_channel = [&](CLI::App* cmd) {
    cmd->add_option("--n", c.n, "number of unknown nodes")->capture_default_str();
    cmd->add_option("--m", c.m, "number of anchors")->capture_default_str();
    cmd->add_option("--gamma-p", c.params.gamma_p, "path-loss exponent")->capture_default_str();
    cmd->add_option("--sigma-db", c.params.sigma_db, "shadowing std-dev (dB)")->capture_default_str();
    cmd->add_option("--eps", c.params.epsilon, "anchor-error scale (m)")->capture_default_str();
    cmd->add_option("--dmax", c.params.d_max, "ranging radius (m)")->capture_default_str();
    cmd->add_option("--seed", c.seed, "seed")->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "generate a scenario and its measurements");
  add_channel(gen);
  gen->add_option("--out", c.out_path, "output JSON (default stdout)");

  auto* solve_cmd = app.add_subcommand("solve", "localize from a measurement file");
  solve_cmd->add_option("--in", c.in_path, "measurement JSON (bare or as written by gen)")->required();
  solve_cmd->add_option("--method", c.method, "proposed or plain")->capture_default_str();
  solve_cmd->add_option("--out", c.out_path, "result JSON (default stdout)");
  solve_cmd->add_option("--dump-problem", c.dump_problem_path, "write the assembled conic problem as JSON");

  auto* bench = app.add_subcommand("bench", "run a Monte-Carlo sweep");
  add_channel(bench);
  bench->add_option("--trials", c.trials, "trials per setting")->capture_default_str();
  bench->add_option("--method", c.method, "comma-separated methods");
  bench->add_option("--config", c.config_path, "experiment config (key=value lines or JSON)");
  bench->add_option("--jobs", c.jobs, "worker threads (fallback: " + std::string(kJobsEnv) + ")");
  bench->add_option("--out", c.out_path, "output directory for trials.csv and summary.csv")->required();

  auto* plot = app.add_subcommand("plot", "render a summary CSV as SVG");
  plot->add_option("--in", c.in_path, "summary CSV")->required();
  plot->add_option("--out", c.out_path, "output SVG (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "wsnloc: error: " << e.what() << "\n";
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    c.params.validate();
    if (*gen) return detail::run_gen(c, out);
    if (*solve_cmd) return detail::run_solve(c, out);
    if (*bench) return detail::run_bench(c, *bench, out);
    if (*plot) return detail::run_plot(c, out);
  } catch (const std::exception& e) {
    err << "wsnloc: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

inline int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace wsnloc::cli
