// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "invsmooth/errors.hpp"
#include "invsmooth/lie/so3.hpp"

namespace invsmooth::sim {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double heading_of(const GroupElement& x) {
  const MatR R = x.rotation();
  return R.rows() == 2 ? std::atan2(R(1, 0), R(0, 0)) : so3::yaw(Eigen::Matrix3d(R));
}

}  // namespace

double wrap_angle(double a) {
  const double r = std::remainder(a, 2.0 * std::numbers::pi);
  return r <= -std::numbers::pi ? r + 2.0 * std::numbers::pi : r;
}

double rms(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

ScenarioTruth make_robot2d_truth(const models::Robot2dConfig& cfg) {
  if (cfg.n_steps < 0 || !(cfg.dt > 0.0)) throw InvalidArgument("robot2d: need n_steps >= 0 and dt > 0");
  ScenarioTruth truth;
  truth.states.push_back(make_se2(cfg.true_heading, cfg.initial_position));
  truth.times.push_back(0.0);
  const GroupAffineStep s = models::robot2d_step(cfg);
  for (int k = 0; k < cfg.n_steps; ++k) {
    truth.steps.push_back(s);
    truth.states.push_back(step(s, truth.states.back()));
    truth.times.push_back((k + 1) * cfg.dt);
    truth.gps_indices.push_back(k + 1);
    truth.gps_positions.emplace_back(truth.states.back().position());
  }
  return truth;
}

ScenarioTruth make_ins_truth(const models::InsConfig& cfg) {
  cfg.validate();
  const int per_gps = cfg.imu_per_gps();
  const double dt = cfg.imu_dt();
  const auto n_still = static_cast<int>(std::lround(cfg.stationary_duration * cfg.imu_rate));
  const auto n_total =
      static_cast<int>(std::lround((cfg.stationary_duration + cfg.moving_duration) * cfg.imu_rate));
  const int n_ramp = std::min(per_gps, n_total - n_still);
  const models::ImuNoise noise = models::ImuNoise::from_config(cfg);

  ScenarioTruth truth;
  const Eigen::Matrix3d R0 = so3::rot_z(cfg.true_yaw_deg * models::kDegToRad);
  truth.states.push_back(make_se23(R0, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()));
  truth.times.push_back(0.0);

  // Forward acceleration that reaches the cruise speed exactly after the ramp.
  const Eigen::Vector3d ramp_accel_nav =
      n_ramp > 0 ? Eigen::Vector3d(R0 * Eigen::Vector3d(cfg.cruise_speed / (n_ramp * dt), 0.0, 0.0))
                 : Eigen::Vector3d::Zero();
  truth.steps.reserve(static_cast<std::size_t>(n_total));
  truth.states.reserve(static_cast<std::size_t>(n_total) + 1);
  for (int k = 0; k < n_total; ++k) {
    const GroupElement& x = truth.states.back();
    const Eigen::Vector3d vdot = (k >= n_still && k < n_still + n_ramp) ? ramp_accel_nav : Eigen::Vector3d::Zero();
    const Eigen::Matrix3d R = x.rotation();
    const Eigen::Vector3d accel = R.transpose() * (vdot - cfg.gravity);
    truth.steps.push_back(models::ins_step(Eigen::Vector3d::Zero(), accel, dt, cfg.gravity, noise));
    truth.states.push_back(step(truth.steps.back(), x));
    truth.times.push_back((k + 1) * dt);
    if ((k + 1) % per_gps == 0) {
      truth.gps_indices.push_back(k + 1);
      truth.gps_positions.emplace_back(truth.states.back().position());
    }
  }
  return truth;
}

double truth_residual(const ScenarioTruth& truth) {
  double worst = 0.0;
  for (std::size_t k = 0; k < truth.steps.size(); ++k) {
    worst = std::max(worst, log(step(truth.steps[k], truth.states[k]).inverse() * truth.states[k + 1]).norm());
  }
  return worst;
}

FactorChainProblem robot2d_problem(const models::Robot2dConfig& cfg, const ScenarioTruth& truth) {
  FactorChainProblem problem{models::robot2d_prior(cfg), truth.steps, {}};
  for (std::size_t k = 0; k < truth.gps_indices.size(); ++k) {
    problem.measurements.push_back(
        MeasurementFactor{{truth.gps_indices[k]}, truth.gps_positions[k], cfg.gps_cov, MeasurementModel::Gps});
  }
  return problem;
}

std::vector<GroupElement> robot2d_initial_guess(const FactorChainProblem& problem) {
  return propagate_states(problem, problem.prior.mean);
}

InsSensorData simulate_ins_sensors(const models::InsConfig& cfg, const ScenarioTruth& truth, std::mt19937_64& rng,
                                   bool add_noise) {
  InsSensorData data;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<GroupAffineStep> window;
  int begin = 0;
  for (std::size_t k = 0; k < truth.gps_indices.size(); ++k) {
    const int end = truth.gps_indices[k];
    window.clear();
    for (int j = begin; j < end; ++j) {
      GroupAffineStep measured = truth.steps[static_cast<std::size_t>(j)];
      if (add_noise && !measured.q_cov.isZero(0.0)) {
        measured.upsilon = measured.upsilon * exp(measured.group(), sample_gaussian(measured.q_cov, rng));
      }
      window.push_back(std::move(measured));
    }
    data.preintegrated.push_back(preintegrate(window));
    Eigen::VectorXd y = truth.gps_positions[k];
    if (add_noise) {
      for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += cfg.sigma_n * gauss(rng);
    }
    data.gps.push_back(std::move(y));
    begin = end;
  }
  return data;
}

InsRunTrace run_ins_alignment(const models::InsConfig& cfg, const ScenarioTruth& truth, const InsSensorData& data,
                              RetractionKind kind, bool correct_init) {
  cfg.validate();
  const GroupElement& x0 = truth.states.front();
  const Eigen::Matrix3d R_err = so3::rot_z(correct_init ? 0.0 : cfg.heading_error_deg * models::kDegToRad);
  const GroupElement mean0 = make_se23(R_err * Eigen::Matrix3d(x0.rotation()), x0.velocity(), x0.position());

  FactorChainProblem problem{models::ins_prior(cfg, mean0), {}, {}};
  TrajectoryEstimate est;
  est.states.push_back(mean0);

  InsRunTrace trace;
  auto record = [&](double t, const GroupElement& x_hat, const GroupElement& x_true, double var_yaw) {
    trace.times.push_back(t);
    trace.yaw_err_deg.push_back(wrap_angle(heading_of(x_hat) - heading_of(x_true)) * kRadToDeg);
    trace.sigma3_deg.push_back(3.0 * std::sqrt(std::max(var_yaw, 0.0)) * kRadToDeg);
  };
  record(0.0, mean0, x0, problem.prior.covariance()(2, 2));

  const Eigen::MatrixXd gps_cov = cfg.sigma_n * cfg.sigma_n * Eigen::Matrix3d::Identity();
  GaussNewtonOptions gn;
  gn.max_iters = 1;
  gn.compute_covariances = true;
  for (std::size_t k = 0; k < data.gps.size(); ++k) {
    const GroupAffineStep& s = data.preintegrated[k];
    problem.steps.push_back(s);
    est.states.push_back(step(s, est.states.back()));
    problem.measurements.push_back(
        MeasurementFactor{{problem.num_states() - 1}, data.gps[k], gps_cov, MeasurementModel::Gps});
    if (problem.num_states() > cfg.window_size) std::tie(problem, est) = marginalize_oldest(problem, est, kind);
    est = gauss_newton(problem, est.states, kind, gn);
    const auto idx = static_cast<std::size_t>(truth.gps_indices[k]);
    record(truth.times[idx], est.states.back(), truth.states[idx], est.covariances.back()(2, 2));
  }
  return trace;
}

RunMetrics run_monte_carlo(const models::InsConfig& cfg, const std::vector<RetractionKind>& methods, int n_runs,
                           std::uint64_t seed, const InsRunOptions& opts) {
  if (n_runs < 1) throw InvalidArgument("run_monte_carlo: n_runs must be at least 1");
  if (methods.empty()) throw InvalidArgument("run_monte_carlo: no methods requested");
  const ScenarioTruth truth = make_ins_truth(cfg);

  RunMetrics out;
  out.n_runs = n_runs;
  for (RetractionKind kind : methods) out.methods.push_back(MethodMetrics{kind, {}, {}, 0.0, 0, 0.0});

  for (int r = 0; r < n_runs; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    const InsSensorData data = simulate_ins_sensors(cfg, truth, rng, opts.add_sensor_noise);
    for (auto& m : out.methods) m.runs.push_back(run_ins_alignment(cfg, truth, data, m.kind, opts.correct_init));
  }

  out.times = out.methods.front().runs.front().times;
  const double peak_from = cfg.stationary_duration + 1.0;
  for (auto& m : out.methods) {
    const std::size_t n_t = out.times.size();
    m.rmse_deg.resize(n_t);
    std::vector<double> column(static_cast<std::size_t>(n_runs));
    for (std::size_t t = 0; t < n_t; ++t) {
      for (int r = 0; r < n_runs; ++r) column[static_cast<std::size_t>(r)] = m.runs[static_cast<std::size_t>(r)].yaw_err_deg[t];
      m.rmse_deg[t] = rms(column);
    }
    m.final_rmse_deg = m.rmse_deg.back();
    double peak_sum = 0.0;
    for (const auto& run : m.runs) {
      if (std::abs(run.yaw_err_deg.back()) <= run.sigma3_deg.back()) ++m.final_within_3sigma;
      double peak = 0.0;
      for (std::size_t t = 0; t < n_t; ++t) {
        if (run.times[t] >= peak_from - 1e-9) peak = std::max(peak, std::abs(run.yaw_err_deg[t]));
      }
      peak_sum += peak;
    }
    m.mean_peak_after_motion_deg = peak_sum / n_runs;
  }
  return out;
}

namespace {

Eigen::VectorXd uniform_vector(int n, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = u(rng);
  return v;
}

// Columns of a Lie subalgebra, picked at random among a few families.
Eigen::MatrixXd random_subalgebra(GroupId g, std::mt19937_64& rng) {
  const int q = tangent_dim(g);
  std::uniform_int_distribution<int> pick(0, 3);
  const int family = pick(rng);
  Eigen::MatrixXd E;
  if (family == 0) {  // any single direction spans a subalgebra
    E = uniform_vector(q, 1.0, rng);
  } else if (g == GroupId::SE2) {
    if (family == 1) {
      E = Eigen::MatrixXd::Identity(3, 2);  // translations
    } else if (family == 2) {
      E = Eigen::MatrixXd::Zero(3, 1);  // rotations about the origin
      E(2, 0) = 1.0;
    } else {
      E = Eigen::MatrixXd::Identity(3, 3);
    }
  } else {
    E = Eigen::MatrixXd::Zero(9, family == 3 ? 7 : 6);
    if (family == 1) {
      E.topLeftCorner(6, 6).setIdentity();  // attitude and velocity
    } else if (family == 2) {
      E.bottomRows(6).setIdentity();  // velocity and position
    } else {
      E(2, 0) = 1.0;  // yaw with velocity and position
      E.bottomRightCorner(6, 6).setIdentity();
    }
  }
  return E;
}

Automorphism random_automorphism(GroupId g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, g == GroupId::SE23 ? 2 : 1);
  const int kind = pick(rng);
  if (kind == 0) return Automorphism::identity();
  if (kind == 1) return Automorphism::conjugation(exp(g, uniform_vector(tangent_dim(g), 0.3, rng)));
  return Automorphism::position_shift(std::uniform_real_distribution<double>(0.01, 0.2)(rng));
}

}  // namespace

RandomChain make_random_chain(GroupId g, int n_steps, std::mt19937_64& rng) {
  if (g != GroupId::SE2 && g != GroupId::SE23) throw InvalidArgument("random chains are built on SE2 or SE23");
  if (n_steps < 0) throw InvalidArgument("random chain: negative step count");
  const int q = tangent_dim(g);
  const GroupElement mean = exp(g, uniform_vector(q, 1.0, rng));
  const Eigen::MatrixXd E = random_subalgebra(g, rng);
  const auto p = E.cols();
  const Eigen::MatrixXd A = uniform_vector(static_cast<int>(p * p), 1.0, rng).reshaped(p, p);
  const Eigen::MatrixXd S = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);

  RandomChain chain{FactorChainProblem{DegeneratePrior{mean, E, S}, {}, {}}, {}};
  chain.truth.push_back(mean * exp(g, E * sample_gaussian(S, rng)));
  for (int k = 0; k < n_steps; ++k) {
    GroupAffineStep s = GroupAffineStep::identity(g);
    s.gamma = exp(g, uniform_vector(q, 0.3, rng));
    s.phi = random_automorphism(g, rng);
    s.upsilon = exp(g, uniform_vector(q, 0.3, rng));
    s.dt = 0.1;
    chain.problem.steps.push_back(s);
    chain.truth.push_back(step(s, chain.truth.back()));
  }

  const int r = g == GroupId::SE2 ? 2 : 3;
  std::bernoulli_distribution observed(0.6);
  std::normal_distribution<double> gauss(0.0, 0.1);
  for (int k = 0; k <= n_steps; ++k) {
    if (!observed(rng) && k != n_steps) continue;
    Eigen::VectorXd y = chain.truth[static_cast<std::size_t>(k)].position();
    for (int j = 0; j < r; ++j) y(j) += gauss(rng);
    chain.problem.measurements.push_back(
        MeasurementFactor{{k}, y, 0.01 * Eigen::MatrixXd::Identity(r, r), MeasurementModel::Gps});
  }
  return chain;
}

IterateReport check_invariant_iterates(const FactorChainProblem& problem, const TrajectoryEstimate& est) {
  IterateReport rep;
  for (const auto& rec : est.iteration_log) {
    rep.max_dynamics_residual = std::max(rep.max_dynamics_residual, rec.max_dynamics_residual);
    if (rec.increments.empty()) continue;
    rep.max_prior_offspan = std::max(rep.max_prior_offspan, orthogonal_residual(problem.prior.basis, rec.increments[0]));
    for (std::size_t i = 0; i + 1 < rec.increments.size(); ++i) {
      const Eigen::VectorXd predicted = log_linear_matrix(problem.steps[i]) * rec.increments[i];
      rep.max_propagation_error = std::max(rep.max_propagation_error, (rec.increments[i + 1] - predicted).norm());
    }
  }
  return rep;
}

}  // namespace invsmooth::sim
