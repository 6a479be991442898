// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Ground truth, simulated sensors and Monte Carlo orchestration for the two
// reference scenarios.

#pragma once

#include <cstdint>
#include <vector>

#include "invsmooth/models.hpp"
#include "invsmooth/smoother/smoother.hpp"

namespace invsmooth::sim {

/// Noise-free trajectory with the inputs that generate it:
/// states[k + 1] == step(steps[k], states[k]).
struct ScenarioTruth {
  std::vector<GroupElement> states;
  std::vector<GroupAffineStep> steps;
  std::vector<double> times;
  std::vector<int> gps_indices;                 // indices into states
  std::vector<Eigen::VectorXd> gps_positions;   // true positions there
};

ScenarioTruth make_robot2d_truth(const models::Robot2dConfig& cfg);

/// Stationary segment, a linear velocity ramp over one GPS interval, then
/// constant forward speed. Body rate is zero throughout.
ScenarioTruth make_ins_truth(const models::InsConfig& cfg);

/// Largest |log(step(s_k, x_k)^-1 x_{k+1})| along the truth.
double truth_residual(const ScenarioTruth& truth);

/// Batch problem for the straight-line robot: rank-1 heading prior, exact
/// odometry and noise-free GPS on every state after the first.
FactorChainProblem robot2d_problem(const models::Robot2dConfig& cfg, const ScenarioTruth& truth);

/// Odometry integrated from the prior mean.
std::vector<GroupElement> robot2d_initial_guess(const FactorChainProblem& problem);

struct InsRunOptions {
  bool add_sensor_noise = true;
  /// Start the estimate at the true state instead of the configured error.
  bool correct_init = false;
};

/// Yaw error history of one sliding-window run, sampled at t = 0 and at
/// every GPS epoch.
struct InsRunTrace {
  std::vector<double> times;
  std::vector<double> yaw_err_deg;  // wrapped to (-180, 180]
  std::vector<double> sigma3_deg;
};

/// Sensor data for one Monte Carlo run, shared by every method.
struct InsSensorData {
  std::vector<GroupAffineStep> preintegrated;  // one per GPS interval
  std::vector<Eigen::VectorXd> gps;            // one per GPS epoch
};

InsSensorData simulate_ins_sensors(const models::InsConfig& cfg, const ScenarioTruth& truth, std::mt19937_64& rng,
                                   bool add_noise);

/// Sliding-window smoother with one Gauss-Newton iteration per GPS epoch.
InsRunTrace run_ins_alignment(const models::InsConfig& cfg, const ScenarioTruth& truth, const InsSensorData& data,
                              RetractionKind kind, bool correct_init = false);

struct MethodMetrics {
  RetractionKind kind = RetractionKind::Invariant;
  std::vector<InsRunTrace> runs;
  /// Root-mean-square of the per-run yaw errors at each sample time.
  std::vector<double> rmse_deg;
  double final_rmse_deg = 0.0;
  /// Runs whose final |yaw error| lies inside their own 3 sigma bound.
  int final_within_3sigma = 0;
  /// Mean over runs of the largest |yaw error| from one second after the
  /// start of motion onwards.
  double mean_peak_after_motion_deg = 0.0;
};

struct RunMetrics {
  std::vector<double> times;
  std::vector<MethodMetrics> methods;
  int n_runs = 0;
};

/// Run k draws its sensor noise from a generator seeded with (seed, k), so
/// results are reproducible and every method sees the same data.
RunMetrics run_monte_carlo(const models::InsConfig& cfg, const std::vector<RetractionKind>& methods, int n_runs,
                           std::uint64_t seed, const InsRunOptions& opts = {});

/// Zero-noise group-affine chain on SE2 or SE23 with a subalgebra prior,
/// GPS on a random subset of states and the trajectory that generated them.
struct RandomChain {
  FactorChainProblem problem;
  std::vector<GroupElement> truth;
};

RandomChain make_random_chain(GroupId g, int n_steps, std::mt19937_64& rng);

/// Worst-case violations of the invariant-smoother structure over a run
/// recorded with keep_increments and keep_states.
struct IterateReport {
  double max_dynamics_residual = 0.0;
  /// Part of xi_0 outside span(prior basis).
  double max_prior_offspan = 0.0;
  /// max |xi_{i+1} - F_i xi_i|.
  double max_propagation_error = 0.0;
};

IterateReport check_invariant_iterates(const FactorChainProblem& problem, const TrajectoryEstimate& est);

/// sqrt(mean(x^2)).
double rms(const std::vector<double>& values);

/// Angle wrapped to (-pi, pi].
double wrap_angle(double a);

}  // namespace invsmooth::sim
