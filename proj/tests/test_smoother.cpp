// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <numbers>

#include "invsmooth/errors.hpp"
#include "invsmooth/models.hpp"
#include "invsmooth/sim.hpp"
#include "invsmooth/smoother/smoother.hpp"
#include "test_util.hpp"

namespace invsmooth {
namespace {

using testing::random_element;
using testing::random_vector;

const RetractionKind kKinds[] = {RetractionKind::Invariant, RetractionKind::ForsterSplit, RetractionKind::GtsamLinear};

// SE(2) chain whose rotation is known and fixed: only the translation is
// uncertain, so every coordinate system in use is affine in the position
// and the problem is linear-Gaussian.
struct LinearInstance {
  FactorChainProblem problem;
  std::vector<GroupElement> init;
  double heading = 0.0;
};

LinearInstance linear_instance(int n_steps, bool gps_on_first, double q, std::mt19937_64& rng) {
  const double heading = 0.6;
  const Eigen::Vector2d x0 = random_vector(2, 5.0, rng);
  Eigen::Matrix2d S;
  S << 2.0, 0.3, 0.3, 1.0;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 2);
  E.topRows(2).setIdentity();
  LinearInstance out{FactorChainProblem{DegeneratePrior{make_se2(heading, x0), E, S}, {}, {}}, {}, heading};
  Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
  Q.topLeftCorner<2, 2>() = q * Eigen::Matrix2d::Identity();
  for (int k = 0; k < n_steps; ++k) {
    GroupAffineStep s = GroupAffineStep::identity(GroupId::SE2);
    s.gamma = make_se2(0.0, random_vector(2, 1.0, rng));
    s.upsilon = make_se2(0.0, random_vector(2, 3.0, rng));
    s.q_cov = Q;
    out.problem.steps.push_back(s);
  }
  out.init = propagate_states(out.problem, out.problem.prior.mean);
  for (int k = gps_on_first ? 0 : 1; k <= n_steps; ++k) {
    const Eigen::Vector2d y = out.init[static_cast<std::size_t>(k)].position() + random_vector(2, 4.0, rng);
    out.problem.measurements.push_back(
        MeasurementFactor{{k}, y, 0.5 * Eigen::Matrix2d::Identity(), MeasurementModel::Gps});
  }
  return out;
}

// Positions of the linear instance by dense weighted least squares:
//   p_0 ~ N(mean, R S R^T), p_{k+1} = p_k + t_k + R u_k + R w_k, y = p + n.
struct PositionPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

PositionPosterior position_oracle(const LinearInstance& inst) {
  const auto& pb = inst.problem;
  const int n = pb.num_states();
  const Eigen::Matrix2d R = pb.prior.mean.rotation();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd b(2 * n);
  b.head(2) = pb.prior.mean.position();
  W.topLeftCorner(2, 2) = (R * pb.prior.coeff_cov * R.transpose()).inverse();
  for (int k = 0; k + 1 < n; ++k) {
    const auto& s = pb.steps[static_cast<std::size_t>(k)];
    A.block(2 * (k + 1), 2 * k, 2, 2) = -Eigen::Matrix2d::Identity();
    b.segment(2 * (k + 1), 2) = s.gamma.position() + R * s.upsilon.position();
    W.block(2 * (k + 1), 2 * (k + 1), 2, 2) =
        (R * s.q_cov.topLeftCorner(2, 2) * R.transpose()).inverse();
  }
  Eigen::MatrixXd info = A.transpose() * W * A;
  Eigen::VectorXd rhs = A.transpose() * W * b;
  for (const auto& m : pb.measurements) {
    const int k = m.states[0];
    const Eigen::Matrix2d Ninv = m.noise_cov.inverse();
    info.block(2 * k, 2 * k, 2, 2) += Ninv;
    rhs.segment(2 * k, 2) += Ninv * m.value;
  }
  PositionPosterior out;
  out.cov = info.inverse();
  out.mean = out.cov * rhs;
  return out;
}

TEST(Prior, Validation) {
  const GroupElement m = GroupElement::identity(GroupId::SE2);
  EXPECT_NO_THROW((DegeneratePrior{m, Eigen::Vector3d(0, 0, 1), Eigen::MatrixXd::Ones(1, 1)}.validate()));
  Eigen::MatrixXd dup(3, 2);
  dup << 1, 2, 0, 0, 0, 0;
  EXPECT_THROW((DegeneratePrior{m, dup, Eigen::MatrixXd::Identity(2, 2)}.validate()), InvalidArgument);
  EXPECT_THROW((DegeneratePrior{m, Eigen::Vector3d(0, 0, 1), -Eigen::MatrixXd::Ones(1, 1)}.validate()),
               InvalidArgument);
  EXPECT_THROW((DegeneratePrior{m, Eigen::Vector2d(0, 1), Eigen::MatrixXd::Ones(1, 1)}.validate()), InvalidArgument);
  const DegeneratePrior d = DegeneratePrior::dense(m, 2.0 * Eigen::Matrix3d::Identity());
  EXPECT_TRUE(d.basis.isIdentity(0.0));
  EXPECT_TRUE(d.covariance().isApprox(2.0 * Eigen::Matrix3d::Identity()));
}

TEST(Prior, SubalgebraResidual) {
  const GroupElement m = GroupElement::identity(GroupId::SE2);
  Eigen::MatrixXd translations = Eigen::MatrixXd::Identity(3, 2);
  EXPECT_TRUE((DegeneratePrior{m, translations, Eigen::Matrix2d::Identity()}.is_subalgebra()));
  Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(3, 2);
  mixed(0, 0) = 1.0;  // nu_1
  mixed(2, 1) = 1.0;  // theta; [theta, nu_1] = nu_2 leaves the span
  const DegeneratePrior bad{m, mixed, Eigen::Matrix2d::Identity()};
  EXPECT_NEAR(bad.subalgebra_residual(), 1.0, 1e-12);
  EXPECT_FALSE(bad.is_subalgebra());
}

TEST(Problem, Validation) {
  std::mt19937_64 rng(1);
  LinearInstance inst = linear_instance(3, true, 0.1, rng);
  EXPECT_NO_THROW(inst.problem.validate());
  inst.problem.measurements[0].states[0] = 9;
  EXPECT_THROW(inst.problem.validate(), InvalidArgument);
  inst = linear_instance(3, true, 0.1, rng);
  inst.problem.measurements[0].value = Eigen::Vector3d::Zero();
  EXPECT_THROW(inst.problem.validate(), InvalidArgument);
  inst = linear_instance(3, true, 0.1, rng);
  inst.problem.steps[1] = GroupAffineStep::identity(GroupId::SE23);
  EXPECT_THROW(inst.problem.validate(), GroupMismatch);
}

TEST(Linearize, ConsistentEstimateHasZeroResiduals) {
  std::mt19937_64 rng(2);
  const sim::RandomChain chain = sim::make_random_chain(GroupId::SE23, 6, rng);
  FactorChainProblem pb = chain.problem;
  pb.measurements.clear();
  const auto states = propagate_states(pb, pb.prior.mean);
  const LinearizedSystem sys = linearize(pb, states, RetractionKind::Invariant);
  EXPECT_TRUE(sys.prior_offset.isZero(1e-15));
  for (const auto& b : sys.transition_offsets) EXPECT_LT(b.norm(), 1e-12);
}

TEST(Linearize, GpsInnovationEqualsInjectedNoise) {
  const models::Robot2dConfig cfg;
  const sim::ScenarioTruth truth = sim::make_robot2d_truth(cfg);
  FactorChainProblem pb = sim::robot2d_problem(cfg, truth);
  const Eigen::Vector2d noise(0.3, -0.7);
  pb.measurements[4].value += noise;
  const LinearizedSystem sys = linearize(pb, truth.states, RetractionKind::Invariant);
  EXPECT_LT((sys.measurements[4].innovation - noise).norm(), 1e-13);
  EXPECT_LT(sys.measurements[3].innovation.norm(), 1e-13);
}

TEST(Linearize, HeadingPriorBasisStaysOnHeading) {
  const models::Robot2dConfig cfg;
  const DegeneratePrior prior = models::robot2d_prior(cfg);
  const FactorChainProblem pb{prior, {}, {}};
  const GroupElement x0 = prior.mean * exp(GroupId::SE2, Eigen::Vector3d(0, 0, 0.9));
  const LinearizedSystem sys = linearize(pb, {x0}, RetractionKind::Invariant, {true});
  EXPECT_NEAR(sys.prior_basis(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(sys.prior_basis(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(sys.prior_basis(2, 0), 1.0, 1e-15);
  EXPECT_NEAR(sys.prior_offset(2), -0.9, 1e-15);
}

TEST(Linearize, NonSubalgebraPriorFailsInvarianceCheck) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 2);
  E(0, 0) = 1.0;
  E(2, 1) = 1.0;
  const DegeneratePrior prior{GroupElement::identity(GroupId::SE2), E, Eigen::Matrix2d::Identity()};
  const GroupElement x0 = exp(GroupId::SE2, Eigen::Vector3d(0.8, 0.0, 0.9));
  const FactorChainProblem pb{prior, {}, {}};
  EXPECT_THROW(linearize(pb, {x0}, RetractionKind::Invariant, {true}), LinearizationFailure);
  EXPECT_NO_THROW(linearize(pb, {x0}, RetractionKind::Invariant, {false}));
}

TEST(Linearize, CutLocusResidualFails) {
  const models::Robot2dConfig cfg;
  const sim::ScenarioTruth truth = sim::make_robot2d_truth(cfg);
  const FactorChainProblem pb = sim::robot2d_problem(cfg, truth);
  std::vector<GroupElement> states = truth.states;
  states[3] = states[3] * make_se2(std::numbers::pi, Eigen::Vector2d::Zero());
  EXPECT_THROW(linearize(pb, states, RetractionKind::Invariant), LinearizationFailure);
  EXPECT_EQ(max_dynamics_residual(pb, states), std::numeric_limits<double>::infinity());
}

TEST(GaussNewton, NoMeasurementsKeepsConsistentInit) {
  std::mt19937_64 rng(3);
  for (GroupId g : {GroupId::SE2, GroupId::SE23}) {
    sim::RandomChain chain = sim::make_random_chain(g, 5, rng);
    chain.problem.measurements.clear();
    const auto init = propagate_states(chain.problem, chain.problem.prior.mean);
    for (RetractionKind k : kKinds) {
      const TrajectoryEstimate est = gauss_newton(chain.problem, init, k);
      EXPECT_TRUE(est.converged);
      for (std::size_t i = 0; i < init.size(); ++i) EXPECT_LT(est.states[i].distance(init[i]), 1e-12);
    }
  }
}

TEST(GaussNewton, ProjectInitRegeneratesFromFirstState) {
  std::mt19937_64 rng(4);
  const sim::RandomChain chain = sim::make_random_chain(GroupId::SE2, 4, rng);
  std::vector<GroupElement> init(5, chain.problem.prior.mean);
  GaussNewtonOptions opts;
  opts.max_iters = 0;
  opts.project_init = true;
  const TrajectoryEstimate est = gauss_newton(chain.problem, init, RetractionKind::Invariant, opts);
  EXPECT_LT(est.iteration_log.front().max_dynamics_residual, 1e-14);
  EXPECT_EQ(est.iteration_log.size(), 1u);
}

TEST(GaussNewton, LinearInstanceConvergesInOneIteration) {
  std::mt19937_64 rng(5);
  for (RetractionKind k : kKinds) {
    const LinearInstance inst = linear_instance(6, true, 0.2, rng);
    GaussNewtonOptions opts;
    opts.compute_covariances = true;
    const TrajectoryEstimate est = gauss_newton(inst.problem, inst.init, k, opts);
    ASSERT_GE(est.iteration_log.size(), 2u);
    EXPECT_LT(est.iteration_log.size(), 4u);
    EXPECT_LT(est.iteration_log[2].step_norm, 1e-9);
    EXPECT_FALSE(est.non_decreasing_cost);
    const PositionPosterior oracle = position_oracle(inst);
    const Eigen::Matrix2d R = inst.problem.prior.mean.rotation();
    for (int i = 0; i < inst.problem.num_states(); ++i) {
      EXPECT_LT((est.states[i].position() - oracle.mean.segment(2 * i, 2)).norm(), 1e-9) << to_string(k);
      EXPECT_NEAR(std::atan2(est.states[i].matrix()(1, 0), est.states[i].matrix()(0, 0)), inst.heading, 1e-14);
      // Translation increments are body-frame: Cov(p) = R Cov(nu) R^T.
      const Eigen::Matrix2d cov_p = R * est.covariances[i].topLeftCorner(2, 2) * R.transpose();
      EXPECT_LT((cov_p - oracle.cov.block(2 * i, 2 * i, 2, 2)).norm(), 1e-9);
    }
  }
}

TEST(GaussNewton, ScalarLikePosteriorInOneIteration) {
  // One state, one exact prior direction, one GPS: closed-form average.
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 1);
  E(0, 0) = 1.0;
  const DegeneratePrior prior{GroupElement::identity(GroupId::SE2), E, Eigen::MatrixXd::Ones(1, 1)};
  const FactorChainProblem pb{prior, {}, {MeasurementFactor{{0}, Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity(), MeasurementModel::Gps}}};
  const TrajectoryEstimate est = gauss_newton(pb, {prior.mean}, RetractionKind::Invariant);
  EXPECT_NEAR(est.states[0].position()(0), 0.5, 1e-12);
  EXPECT_NEAR(est.states[0].position()(1), 0.0, 1e-15);
  EXPECT_LE(est.iteration_log.size(), 3u);
}

TEST(GaussNewton, InvariantIteratesStayFeasibleOnRandomChains) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const GroupId g = t % 2 == 0 ? GroupId::SE2 : GroupId::SE23;
    const int n = 1 + static_cast<int>(rng() % 20);
    const sim::RandomChain chain = sim::make_random_chain(g, n, rng);
    GaussNewtonOptions opts;
    opts.max_iters = 6;
    opts.project_init = true;
    opts.keep_increments = true;
    opts.verify_prior_invariance = true;
    const std::vector<GroupElement> init(static_cast<std::size_t>(n) + 1, chain.problem.prior.mean);
    const TrajectoryEstimate est = gauss_newton(chain.problem, init, RetractionKind::Invariant, opts);
    for (const auto& rec : est.iteration_log) {
      EXPECT_LT(rec.max_dynamics_residual, 1e-8) << "chain " << t;
      EXPECT_LT(rec.subspace_residual, 1e-8) << "chain " << t;
      if (rec.increments.empty()) continue;
      EXPECT_LT(orthogonal_residual(chain.problem.prior.basis, rec.increments[0]), 1e-8);
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd pushed = log_linear_matrix(chain.problem.steps[i]) * rec.increments[i];
        EXPECT_LT((rec.increments[i + 1] - pushed).norm(), 1e-8) << "chain " << t << " state " << i;
      }
    }
  }
}

TEST(GaussNewton, RobotLengthIsPreservedOnlyByInvariant) {
  const models::Robot2dConfig cfg;
  const sim::ScenarioTruth truth = sim::make_robot2d_truth(cfg);
  const FactorChainProblem pb = sim::robot2d_problem(cfg, truth);
  const double true_len = trajectory_length(truth.states);
  EXPECT_NEAR(true_len, 70.0, 1e-12);
  GaussNewtonOptions opts;
  opts.max_iters = 10;
  const TrajectoryEstimate inv = gauss_newton(pb, sim::robot2d_initial_guess(pb), RetractionKind::Invariant, opts);
  for (const auto& r : inv.iteration_log) {
    EXPECT_NEAR(r.trajectory_length, true_len, 1e-9 * true_len);
    EXPECT_LT(r.max_dynamics_residual, 1e-8);
  }
  const TrajectoryEstimate lin = gauss_newton(pb, sim::robot2d_initial_guess(pb), RetractionKind::GtsamLinear, opts);
  double worst = 0.0;
  for (const auto& r : lin.iteration_log) worst = std::max(worst, std::abs(r.trajectory_length - true_len) / true_len);
  EXPECT_GT(worst, 0.01);
}

TEST(Retraction, InvariantUpdateAlongReachableDirectionKeepsRadius) {
  const models::Robot2dConfig cfg;
  const DegeneratePrior prior = models::robot2d_prior(cfg);
  const GroupAffineStep s = models::robot2d_step(cfg);
  GroupElement x = prior.mean;
  Eigen::Vector3d dir(0, 0, 1);
  for (int i = 1; i <= 10; ++i) {
    x = step(s, x);
    dir = log_linear_matrix(s) * dir;
    for (double alpha : {-2.5, -1.0, 0.3, 2.0}) {
      const GroupElement moved = apply_retraction(RetractionKind::Invariant, x, alpha * dir);
      EXPECT_NEAR((moved.position() - prior.mean.position()).norm(), i * cfg.speed * cfg.dt, 1e-9);
    }
  }
}

TEST(Marginalize, RequiresTwoStates) {
  std::mt19937_64 rng(7);
  const LinearInstance inst = linear_instance(0, true, 0.1, rng);
  TrajectoryEstimate est;
  est.states = inst.init;
  EXPECT_THROW(marginalize_oldest(inst.problem, est, RetractionKind::Invariant), InvalidArgument);
}

TEST(Marginalize, NoiselessPushMatchesReachableSubspace) {
  std::mt19937_64 rng(8);
  sim::RandomChain chain = sim::make_random_chain(GroupId::SE23, 3, rng);
  chain.problem.measurements.erase(
      std::remove_if(chain.problem.measurements.begin(), chain.problem.measurements.end(),
                     [](const MeasurementFactor& m) { return m.states[0] == 0; }),
      chain.problem.measurements.end());
  TrajectoryEstimate est;
  est.states = propagate_states(chain.problem, chain.problem.prior.mean);
  const auto [next, next_est] = marginalize_oldest(chain.problem, est, RetractionKind::Invariant);
  const ReachableSubspace r =
      propagate_subspace(chain.problem.steps[0], ReachableSubspace{chain.problem.prior.mean, chain.problem.prior.basis});
  EXPECT_LT(next.prior.mean.distance(r.anchor), 1e-14);
  EXPECT_LT((next.prior.basis - r.basis).norm(), 1e-14);
  EXPECT_TRUE(next.prior.coeff_cov.isApprox(chain.problem.prior.coeff_cov, 0.0));
  EXPECT_EQ(next.num_states(), chain.problem.num_states() - 1);
  EXPECT_EQ(next_est.states.size(), est.states.size() - 1);
  for (const auto& m : next.measurements) EXPECT_GE(m.states[0], 0);
}

class MarginalizeLinear : public ::testing::TestWithParam<std::tuple<bool, double, RetractionKind>> {};

TEST_P(MarginalizeLinear, SlidingWindowEqualsBatch) {
  const auto [gps_on_first, q, kind] = GetParam();
  std::mt19937_64 rng(9);
  const LinearInstance inst = linear_instance(8, gps_on_first, q, rng);
  const TrajectoryEstimate batch = gauss_newton(inst.problem, inst.init, kind);

  FactorChainProblem pb = inst.problem;
  TrajectoryEstimate est;
  est.states = inst.init;
  const int dropped = 3;
  for (int k = 0; k < dropped; ++k) std::tie(pb, est) = marginalize_oldest(pb, est, kind);
  const TrajectoryEstimate window = gauss_newton(pb, est.states, kind);
  ASSERT_EQ(window.states.size(), batch.states.size() - dropped);
  for (std::size_t i = 0; i < window.states.size(); ++i) {
    EXPECT_LT(window.states[i].distance(batch.states[i + dropped]), 1e-8) << "state " << i + dropped;
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, MarginalizeLinear,
                         ::testing::Values(std::make_tuple(true, 0.2, RetractionKind::Invariant),
                                           std::make_tuple(false, 0.2, RetractionKind::Invariant),
                                           std::make_tuple(false, 0.0, RetractionKind::Invariant),
                                           std::make_tuple(true, 0.0, RetractionKind::Invariant),
                                           std::make_tuple(true, 0.2, RetractionKind::GtsamLinear),
                                           std::make_tuple(false, 0.2, RetractionKind::ForsterSplit)));

TEST(Marginalize, PriorMatchesBatchMarginalCovariance) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 5; ++t) {
    const GroupElement mean = random_element(GroupId::SE2, 2.0, rng);
    const Eigen::Matrix3d A = Eigen::Matrix3d::Random();
    const Eigen::Matrix3d P0 = A * A.transpose() + 0.2 * Eigen::Matrix3d::Identity();
    GroupAffineStep s = GroupAffineStep::identity(GroupId::SE2);
    s.gamma = random_element(GroupId::SE2, 1.0, rng);
    s.upsilon = random_element(GroupId::SE2, 1.0, rng);
    s.phi = Automorphism::conjugation(random_element(GroupId::SE2, 1.0, rng));
    s.q_cov = 0.05 * Eigen::Matrix3d::Identity();
    const Eigen::Matrix2d N = 0.3 * Eigen::Matrix2d::Identity();
    const FactorChainProblem pb{DegeneratePrior::dense(mean, P0),
                                {s},
                                {MeasurementFactor{{0}, mean.position() + Eigen::Vector2d(0.4, -0.2), N,
                                                   MeasurementModel::Gps}}};
    TrajectoryEstimate est;
    est.states = {mean, step(s, mean)};
    const auto [next, next_est] = marginalize_oldest(pb, est, RetractionKind::Invariant);

    // Information matrix of (xi_0, xi_1) at the estimate, then invert.
    const Eigen::Matrix3d F = log_linear_matrix(s);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 6);
    H.leftCols(2) = mean.rotation();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(6, 6);
    const Eigen::Matrix3d Qi = s.q_cov.inverse();
    info.topLeftCorner(3, 3) = P0.inverse() + F.transpose() * Qi * F;
    info.block(0, 3, 3, 3) = -F.transpose() * Qi;
    info.block(3, 0, 3, 3) = -Qi * F;
    info.bottomRightCorner(3, 3) = Qi;
    info += H.transpose() * N.inverse() * H;
    const Eigen::Matrix3d marginal = info.inverse().bottomRightCorner(3, 3);
    EXPECT_LT((next.prior.covariance() - marginal).norm(), 1e-6);
  }
}

TEST(Diagnostics, PriorFromCovarianceKeepsRange) {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C.topLeftCorner<2, 2>() << 2.0, 0.5, 0.5, 1.0;
  const DegeneratePrior p = prior_from_covariance(GroupElement::identity(GroupId::SE2), C);
  EXPECT_EQ(p.basis.cols(), 2);
  EXPECT_LT((p.covariance() - C).norm(), 1e-14);
  EXPECT_NO_THROW(p.validate());
}

TEST(Diagnostics, OrthogonalResidual) {
  const Eigen::MatrixXd E = Eigen::MatrixXd::Identity(3, 2);
  EXPECT_NEAR(orthogonal_residual(E, Eigen::Vector3d(1, 2, 3)), 3.0, 1e-15);
  EXPECT_NEAR(orthogonal_residual(Eigen::MatrixXd::Zero(3, 0), Eigen::Vector3d(0, 3, 4)), 5.0, 1e-15);
}

}  // namespace
}  // namespace invsmooth
