// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "selftest.hpp"

#include <algorithm>
#include <cmath>

#include "invsmooth/models.hpp"
#include "invsmooth/sim.hpp"
#include "invsmooth/smoother/smoother.hpp"

namespace invsmooth::cli {

namespace {

Eigen::VectorXd random_vector(int n, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = gauss(rng);
  return v.normalized() * radius * unit(rng);
}

double exp_log_roundtrip(std::mt19937_64& rng) {
  double worst = 0.0;
  for (GroupId g : {GroupId::SO2, GroupId::SE2, GroupId::SO3, GroupId::SE23}) {
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd v = random_vector(tangent_dim(g), 3.0, rng);
      worst = std::max(worst, (log(exp(g, v)) - v).norm());
    }
  }
  return worst;
}

double adjoint_conjugation(std::mt19937_64& rng) {
  double worst = 0.0;
  for (GroupId g : {GroupId::SO2, GroupId::SE2, GroupId::SO3, GroupId::SE23}) {
    for (int k = 0; k < 200; ++k) {
      const GroupElement x = exp(g, random_vector(tangent_dim(g), 3.0, rng));
      const Eigen::VectorXd v = random_vector(tangent_dim(g), 1.0, rng);
      worst = std::max(worst, (x * exp(g, v) * x.inverse()).distance(exp(g, adjoint(x) * v)));
    }
  }
  return worst;
}

double scalar_chain_error() {
  LinearizedSystem sys;
  sys.dim = 1;
  sys.prior_basis = Eigen::MatrixXd::Ones(1, 1);
  sys.prior_coeff_cov = Eigen::MatrixXd::Ones(1, 1);
  sys.prior_offset = Eigen::VectorXd::Zero(1);
  sys.transitions = {Eigen::MatrixXd::Ones(1, 1)};
  sys.process_covs = {Eigen::MatrixXd::Zero(1, 1)};
  sys.transition_offsets = {Eigen::VectorXd::Zero(1)};
  sys.measurements = {LinearMeasurement{{1}, {Eigen::MatrixXd::Ones(1, 1)}, Eigen::VectorXd::Ones(1),
                                        Eigen::MatrixXd::Ones(1, 1)}};
  const ChainSolution sol = solve_degenerate_chain(sys);
  return std::max(std::abs(sol.increments[0](0) - 0.5), std::abs(sol.increments[1](0) - 0.5));
}

double invariant_iterates(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const GroupId g = t % 2 == 0 ? GroupId::SE2 : GroupId::SE23;
    const int n = 1 + static_cast<int>(rng() % 20);
    const sim::RandomChain chain = sim::make_random_chain(g, n, rng);
    GaussNewtonOptions gn;
    gn.max_iters = 5;
    gn.project_init = true;
    gn.keep_increments = true;
    const std::vector<GroupElement> init(static_cast<std::size_t>(n) + 1, chain.problem.prior.mean);
    const TrajectoryEstimate est = gauss_newton(chain.problem, init, RetractionKind::Invariant, gn);
    const sim::IterateReport rep = sim::check_invariant_iterates(chain.problem, est);
    worst = std::max({worst, rep.max_dynamics_residual, rep.max_prior_offspan, rep.max_propagation_error});
  }
  return worst;
}

double robot2d_length_drift() {
  const models::Robot2dConfig cfg;
  const sim::ScenarioTruth truth = sim::make_robot2d_truth(cfg);
  const FactorChainProblem problem = sim::robot2d_problem(cfg, truth);
  GaussNewtonOptions gn;
  gn.max_iters = 10;
  const TrajectoryEstimate est = gauss_newton(problem, sim::robot2d_initial_guess(problem), RetractionKind::Invariant, gn);
  const double truth_len = invsmooth::trajectory_length(truth.states);
  double worst = 0.0;
  for (const auto& r : est.iteration_log) worst = std::max(worst, std::abs(r.trajectory_length - truth_len) / truth_len);
  return worst;
}

double preintegration_closure(std::mt19937_64& rng) {
  const models::InsConfig cfg;
  const models::ImuNoise noise = models::ImuNoise::from_config(cfg);
  std::vector<GroupAffineStep> steps;
  for (int k = 0; k < 50; ++k) {
    steps.push_back(models::ins_step(random_vector(3, 0.5, rng), random_vector(3, 5.0, rng), cfg.imu_dt(),
                                     cfg.gravity, noise));
  }
  const GroupAffineStep composed = preintegrate(steps);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const GroupElement x0 = exp(GroupId::SE23, random_vector(9, 3.0, rng));
    GroupElement x = x0;
    for (const auto& s : steps) x = step(s, x);
    worst = std::max(worst, x.distance(step(composed, x0)));
  }
  return worst;
}

}  // namespace

double log_linearity_error(const GroupAffineStep& s, int samples, std::mt19937_64& rng, const AdjointFn& adjoint) {
  const GroupId g = s.group();
  const int q = tangent_dim(g);
  const MatQ F = adjoint(s.upsilon.inverse()) * automorphism_matrix(g, s.phi);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const GroupElement x = exp(g, random_vector(q, 3.0, rng));
    const Eigen::VectorXd xi = random_vector(q, 1.0, rng);
    worst = std::max(worst, step(s, x * exp(g, xi)).distance(step(s, x) * exp(g, F * xi)));
  }
  return worst;
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const double scale = opts.tol_scale;
  std::vector<CheckResult> out;
  auto check = [&](std::string name, double value, double threshold) {
    threshold *= scale;
    out.push_back(CheckResult{std::move(name), std::isfinite(value) && value <= threshold, value, threshold});
  };

  check("lie.exp_log_roundtrip", exp_log_roundtrip(rng), 1e-10);
  check("lie.adjoint_conjugation", adjoint_conjugation(rng), 1e-10);

  const models::Robot2dConfig robot;
  check("dynamics.log_linearity.robot2d", log_linearity_error(models::robot2d_step(robot), 1000, rng, opts.adjoint),
        1e-10);
  const models::InsConfig ins;
  const GroupAffineStep imu = models::ins_step(Eigen::Vector3d(0.1, -0.2, 0.3), Eigen::Vector3d(0.5, 0.1, 9.81),
                                               ins.imu_dt(), ins.gravity, models::ImuNoise::from_config(ins));
  check("dynamics.log_linearity.ins", log_linearity_error(imu, 1000, rng, opts.adjoint), 1e-10);
  check("dynamics.preintegration_closure", preintegration_closure(rng), 1e-9);

  check("smoother.scalar_chain", scalar_chain_error(), 1e-12);
  check("smoother.invariant_iterates", invariant_iterates(rng), 1e-8);
  check("robot2d.invariant_fixed_length", robot2d_length_drift(), 1e-9);
  check("sim.ins_truth_consistency", sim::truth_residual(sim::make_ins_truth(ins)), 1e-9);
  return out;
}

}  // namespace invsmooth::cli
