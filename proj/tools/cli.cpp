// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "invsmooth/errors.hpp"
#include "invsmooth/sim.hpp"
#include "invsmooth/smoother/smoother.hpp"

namespace invsmooth::cli {

namespace {

// Comma-separated rows with round-trippable doubles.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<const char*> header) : file_(path) {
    if (!file_) throw ConfigError("cannot write " + path.string());
    file_ << std::setprecision(17);
    bool first = true;
    for (const char* h : header) {
      file_ << (first ? "" : ",") << h;
      first = false;
    }
    file_ << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((file_ << (first ? "" : ",") << fields, first = false), ...);
    file_ << '\n';
  }

 private:
  std::ofstream file_;
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

const std::vector<std::string> kKnownKeys = {
    "retraction", "seed", "out", "steps", "speed", "dt", "heading_error", "heading_sigma", "gps_sigma",
    "max_iters", "tol", "window", "runs", "imu_rate", "gps_rate", "sigma_g", "sigma_a", "sigma_n",
    "sigma_p0", "sigma_v0", "sigma_yaw0", "sigma_tilt0", "heading_error_deg", "true_yaw_deg", "stationary",
    "moving", "cruise_speed", "sensor_noise", "correct_init", "tol_scale"};

}  // namespace

void cmd_robot2d(const Robot2dExperiment& ex, const std::filesystem::path& out_dir, std::ostream& log) {
  ensure_dir(out_dir);
  CsvWriter lengths(out_dir / "length_per_iter.csv",
                    {"retraction", "iteration", "length_m", "max_dyn_residual", "subspace_residual"});
  if (ex.model.n_steps == 0) {
    log << "robot2d: no steps requested, wrote headers only\n";
    return;
  }

  const sim::ScenarioTruth truth = sim::make_robot2d_truth(ex.model);
  const FactorChainProblem problem = sim::robot2d_problem(ex.model, truth);
  const std::vector<GroupElement> init = sim::robot2d_initial_guess(problem);
  GaussNewtonOptions gn;
  gn.max_iters = ex.max_iters;
  gn.tol = ex.tol;
  gn.keep_states = true;

  std::vector<std::pair<RetractionKind, TrajectoryEstimate>> results;
  std::size_t longest = 0;
  for (RetractionKind kind : ex.retractions) {
    TrajectoryEstimate est = gauss_newton(problem, init, kind, gn);
    for (const auto& r : est.iteration_log) {
      lengths.row(to_string(kind), r.iteration, r.trajectory_length, r.max_dynamics_residual, r.subspace_residual);
    }
    longest = std::max(longest, est.iteration_log.size());
    log << std::setw(10) << to_string(kind) << ": " << est.iteration_log.size() - 1 << " iterations, converged "
        << (est.converged ? "yes" : "no") << ", final length " << est.iteration_log.back().trajectory_length
        << " m (truth " << invsmooth::trajectory_length(truth.states) << " m)\n";
    results.emplace_back(kind, std::move(est));
  }

  for (std::size_t k = 0; k < longest; ++k) {
    CsvWriter traj(out_dir / ("trajectory_iter" + std::to_string(k) + ".csv"), {"retraction", "state", "x", "y"});
    for (const auto& [kind, est] : results) {
      if (k >= est.iteration_log.size()) continue;
      const auto& states = est.iteration_log[k].states;
      for (std::size_t i = 0; i < states.size(); ++i) {
        const VecR p = states[i].position();
        traj.row(to_string(kind), i, p(0), p(1));
      }
    }
  }
}

void cmd_ins_align(const InsExperiment& ex, const std::filesystem::path& out_dir, std::ostream& log) {
  ensure_dir(out_dir);
  const sim::RunMetrics metrics = sim::run_monte_carlo(ex.model, ex.retractions, ex.runs, ex.seed,
                                                       sim::InsRunOptions{ex.sensor_noise, ex.correct_init});

  CsvWriter yaw(out_dir / "yaw_error.csv", {"t", "method", "yaw_err_deg", "sigma3_deg"});
  CsvWriter summary(out_dir / "summary.csv", {"method", "final_rmse_deg", "pct_within_3sigma"});
  for (const auto& m : metrics.methods) {
    for (std::size_t t = 0; t < metrics.times.size(); ++t) {
      double sigma3 = 0.0;
      for (const auto& run : m.runs) sigma3 += run.sigma3_deg[t];
      yaw.row(metrics.times[t], to_string(m.kind), m.rmse_deg[t], sigma3 / metrics.n_runs);
    }
    const double pct = 100.0 * m.final_within_3sigma / metrics.n_runs;
    summary.row(to_string(m.kind), m.final_rmse_deg, pct);
    log << std::setw(10) << to_string(m.kind) << ": final yaw RMSE " << m.final_rmse_deg << " deg, "
        << m.final_within_3sigma << "/" << metrics.n_runs << " runs inside 3 sigma, mean peak after motion "
        << m.mean_peak_after_motion_deg << " deg\n";
  }
}

int cmd_selftest(const SelftestOptions& opts, std::ostream& log) {
  const std::vector<CheckResult> results = run_selftest(opts);
  int failed = 0;
  for (const auto& r : results) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << std::setprecision(3) << r.value
        << " threshold=" << r.threshold << '\n';
    if (!r.passed) ++failed;
  }
  log << "selftest: " << results.size() - failed << "/" << results.size() << " passed\n";
  return failed == 0 ? kOk : kCheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invariant smoothing experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::string> retractions;
  std::vector<std::string> set_pairs;
  std::string config_path;
  int window = 0;
  int runs = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  double imu_rate = 0.0;
  double gps_rate = 0.0;
  double tol_scale = 1.0;
  std::string out_dir = ".";

  auto* opt_retraction = app.add_option("--retraction", retractions, "invariant, forster or gtsam (repeatable)");
  app.add_option("--config", config_path, "key=value manifest");
  app.add_option("--set", set_pairs, "override one manifest key (KEY=VALUE, repeatable)");
  auto* opt_window = app.add_option("--window", window, "sliding window size (ins-align)");
  auto* opt_runs = app.add_option("--runs", runs, "Monte Carlo runs (ins-align)");
  auto* opt_seed = app.add_option("--seed", seed, "base random seed");
  auto* opt_imu = app.add_option("--imu-rate", imu_rate, "IMU rate in Hz");
  auto* opt_gps = app.add_option("--gps-rate", gps_rate, "GPS rate in Hz");
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_steps = app.add_option("--steps", steps, "number of robot2d steps");
  auto* opt_tol = app.add_option("--tol-scale", tol_scale, "threshold multiplier for selftest");

  auto* robot2d = app.add_subcommand("robot2d", "straight-line robot with a wrong heading prior");
  auto* ins = app.add_subcommand("ins-align", "INS alignment with IMU and GPS");
  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    KeyValueConfig cfg;
    if (!config_path.empty()) cfg = KeyValueConfig::load(config_path);
    for (const auto& pair : set_pairs) cfg.set_pair(pair);
    if (opt_retraction->count() > 0) {
      std::string joined;
      for (const auto& r : retractions) joined += (joined.empty() ? "" : ",") + r;
      cfg.set("retraction", joined);
    }
    auto put = [&cfg](CLI::Option* opt, const std::string& key) {
      if (opt->count() > 0) cfg.set(key, opt->as<std::string>());
    };
    put(opt_window, "window");
    put(opt_runs, "runs");
    put(opt_seed, "seed");
    put(opt_imu, "imu_rate");
    put(opt_gps, "gps_rate");
    put(opt_out, "out");
    put(opt_steps, "steps");
    put(opt_tol, "tol_scale");
    cfg.require_known(kKnownKeys);
    const std::filesystem::path dir = cfg.get_string("out", ".");

    if (robot2d->parsed()) {
      cmd_robot2d(robot2d_experiment(cfg), dir, out);
    } else if (ins->parsed()) {
      cmd_ins_align(ins_experiment(cfg), dir, out);
    } else if (selftest->parsed()) {
      SelftestOptions opts;
      opts.tol_scale = cfg.get_double("tol_scale", 1.0);
      opts.seed = cfg.get_u64("seed", opts.seed);
      if (!(opts.tol_scale > 0.0)) throw ConfigError("tol_scale must be positive");
      return cmd_selftest(opts, out);
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace invsmooth::cli
