// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <random>

#include "invsmooth/errors.hpp"
#include "invsmooth/smoother/linear_system.hpp"

namespace invsmooth {
namespace {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Posterior of the chain written as one dense weighted least-squares
// problem: minimise |A X - b|^2_{Pi + eps I} + |nhat - H X|^2_N. Solved in
// information form, which needs eps > 0 whenever Pi is singular.
template <typename T>
struct DensePosterior {
  VecX<T> mean;
  MatX<T> cov;
};

template <typename T>
DensePosterior<T> dense_posterior(const LinearizedSystem& sys, T eps) {
  const int q = sys.dim;
  const int n = sys.num_states();
  const int m = sys.measurement_rows();
  MatX<T> A = MatX<T>::Identity(n * q, n * q);
  MatX<T> Pi = MatX<T>::Zero(n * q, n * q);
  VecX<T> b(n * q);
  Pi.topLeftCorner(q, q) =
      (sys.prior_basis * sys.prior_coeff_cov * sys.prior_basis.transpose()).template cast<T>();
  b.head(q) = sys.prior_offset.cast<T>();
  for (int i = 0; i + 1 < n; ++i) {
    A.block((i + 1) * q, i * q, q, q) = -sys.transitions[i].cast<T>();
    Pi.block((i + 1) * q, (i + 1) * q, q, q) = sys.process_covs[i].cast<T>();
    b.segment((i + 1) * q, q) = sys.transition_offsets[i].cast<T>();
  }
  Pi += eps * MatX<T>::Identity(n * q, n * q);
  MatX<T> H = MatX<T>::Zero(m, n * q);
  MatX<T> N = MatX<T>::Zero(m, m);
  VecX<T> nhat(m);
  int row = 0;
  for (const auto& meas : sys.measurements) {
    const auto r = static_cast<int>(meas.innovation.size());
    for (std::size_t j = 0; j < meas.states.size(); ++j) {
      H.block(row, meas.states[j] * q, r, q) += meas.jacobians[j].cast<T>();
    }
    N.block(row, row, r, r) = meas.noise_cov.cast<T>();
    nhat.segment(row, r) = meas.innovation.cast<T>();
    row += r;
  }
  const MatX<T> Pi_inv = Pi.ldlt().solve(MatX<T>::Identity(n * q, n * q));
  const MatX<T> N_inv = N.ldlt().solve(MatX<T>::Identity(m, m));
  const MatX<T> info = A.transpose() * Pi_inv * A + H.transpose() * N_inv * H;
  const VecX<T> rhs = A.transpose() * Pi_inv * b + H.transpose() * N_inv * nhat;
  DensePosterior<T> out;
  out.cov = info.ldlt().solve(MatX<T>::Identity(n * q, n * q));
  out.mean = out.cov * rhs;
  return out;
}

Eigen::VectorXd stacked(const std::vector<Eigen::VectorXd>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double floor = 0.1) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return A * A.transpose() / n + floor * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::MatrixXd A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = gauss(rng);
  return A;
}

// Random chain; `degenerate` gives a rank-deficient prior and some Q = 0.
LinearizedSystem random_system(int q, int n_states, int prior_rank, bool degenerate, std::mt19937_64& rng) {
  LinearizedSystem sys;
  sys.dim = q;
  sys.prior_basis = random_matrix(q, prior_rank, rng);
  sys.prior_coeff_cov = random_spd(prior_rank, rng);
  sys.prior_offset = random_matrix(q, 1, rng);
  for (int i = 0; i + 1 < n_states; ++i) {
    sys.transitions.push_back(Eigen::MatrixXd::Identity(q, q) + random_matrix(q, q, rng, 0.3));
    const bool zero_noise = degenerate && i % 2 == 0;
    sys.process_covs.push_back(zero_noise ? Eigen::MatrixXd::Zero(q, q) : Eigen::MatrixXd(0.1 * random_spd(q, rng)));
    sys.transition_offsets.push_back(random_matrix(q, 1, rng, 0.5));
  }
  for (int i = 0; i < n_states; ++i) {
    sys.measurements.push_back(LinearMeasurement{{i}, {random_matrix(2, q, rng)}, random_matrix(2, 1, rng),
                                                 random_spd(2, rng, 0.5)});
  }
  return sys;
}

TEST(Solver, ScalarChainMatchesGaussianPosterior) {
  // x0 ~ N(0, 1), x1 = x0, y = x1 + n, n ~ N(0, 1), y = 1.
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
  EXPECT_NEAR(sol.increments[0](0), 0.5, 1e-12);
  EXPECT_NEAR(sol.increments[1](0), 0.5, 1e-12);
  EXPECT_NEAR(posterior_covariance(sys, sol, 0)(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(posterior_covariance(sys, sol, 1)(0, 0), 0.5, 1e-12);
}

TEST(Solver, ZeroResidualsGiveZeroIncrement) {
  std::mt19937_64 rng(1);
  LinearizedSystem sys = random_system(3, 5, 2, true, rng);
  sys.prior_offset.setZero();
  for (auto& b : sys.transition_offsets) b.setZero();
  for (auto& m : sys.measurements) m.innovation.setZero();
  for (const auto& xi : solve_degenerate_chain(sys).increments) EXPECT_TRUE(xi.isZero(0.0));
}

TEST(Solver, NoMeasurementsPropagatesOffsets) {
  std::mt19937_64 rng(2);
  LinearizedSystem sys = random_system(3, 4, 3, false, rng);
  sys.measurements.clear();
  const ChainSolution sol = solve_degenerate_chain(sys);
  Eigen::VectorXd x = sys.prior_offset;
  EXPECT_LT((sol.increments[0] - x).norm(), 1e-14);
  for (int i = 0; i + 1 < sys.num_states(); ++i) {
    x = sys.transitions[i] * x + sys.transition_offsets[i];
    EXPECT_LT((sol.increments[i + 1] - x).norm(), 1e-13);
  }
}

TEST(Solver, FullRankChainMatchesDenseInformationForm) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearizedSystem sys = random_system(3, 6, 3, false, rng);
    const ChainSolution sol = solve_degenerate_chain(sys);
    const DensePosterior<double> oracle = dense_posterior<double>(sys, 0.0);
    EXPECT_LT((stacked(sol.increments) - oracle.mean).norm(), 1e-9 * std::max(1.0, oracle.mean.norm()));
    for (int i = 0; i < sys.num_states(); ++i) {
      EXPECT_LT((posterior_covariance(sys, sol, i) - oracle.cov.block(3 * i, 3 * i, 3, 3)).norm(), 1e-9);
    }
  }
}

TEST(Solver, GainRowsVanishWhereProcessNoiseIsZero) {
  std::mt19937_64 rng(4);
  const LinearizedSystem sys = random_system(3, 6, 2, true, rng);
  const ChainSolution sol = solve_degenerate_chain(sys);
  for (int i = 0; i + 1 < sys.num_states(); ++i) {
    const Eigen::MatrixXd rows = sol.gain.middleRows((i + 1) * 3, 3);
    if (sys.process_covs[i].isZero(0.0)) {
      EXPECT_TRUE(rows.isZero(0.0)) << "step " << i;
    } else {
      EXPECT_GT(rows.norm(), 0.0);
    }
  }
  // The prior rows live in span(E~).
  const Eigen::MatrixXd E = sys.prior_basis;
  const Eigen::MatrixXd K0 = sol.gain.topRows(3);
  const Eigen::MatrixXd proj = E * (E.transpose() * E).ldlt().solve(E.transpose());
  EXPECT_LT((K0 - proj * K0).norm(), 1e-12);
}

TEST(Solver, DegenerateLimitConvergesLinearlyInEpsilon) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const LinearizedSystem sys = random_system(3, 5, 1, true, rng);
    const Eigen::VectorXd closed = stacked(solve_degenerate_chain(sys).increments);
    std::vector<double> errors;
    const std::vector<double> eps = {1e-4, 1e-6, 1e-8};
    for (double e : eps) {
      const DensePosterior<long double> reg = dense_posterior<long double>(sys, static_cast<long double>(e));
      errors.push_back(static_cast<double>((reg.mean - closed.cast<long double>()).norm()));
    }
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      const double order = std::log(errors[k] / errors[k + 1]) / std::log(eps[k] / eps[k + 1]);
      EXPECT_GE(order, 0.9) << "trial " << trial << " errors " << errors[k] << " " << errors[k + 1];
    }
  }
}

TEST(Solver, SmallProcessNoiseApproachesZeroNoiseSolution) {
  std::mt19937_64 rng(6);
  const LinearizedSystem sys = random_system(3, 5, 2, true, rng);
  const Eigen::VectorXd closed = stacked(solve_degenerate_chain(sys).increments);
  double previous = 0.0;
  for (double e : {1e-4, 1e-6, 1e-8}) {
    LinearizedSystem noisy = sys;
    for (auto& Q : noisy.process_covs) Q += e * Eigen::MatrixXd::Identity(3, 3);
    const double err = (stacked(solve_degenerate_chain(noisy).increments) - closed).norm();
    if (previous > 0.0) EXPECT_LT(err, previous * 0.05);
    previous = err;
  }
}

TEST(Solver, IllConditionedInnovationThrows) {
  LinearizedSystem sys;
  sys.dim = 2;
  sys.prior_basis = Eigen::MatrixXd::Zero(2, 0);
  sys.prior_coeff_cov = Eigen::MatrixXd::Zero(0, 0);
  sys.prior_offset = Eigen::VectorXd::Zero(2);
  Eigen::Matrix2d N = Eigen::Vector2d(1.0, 1e-14).asDiagonal();
  sys.measurements = {LinearMeasurement{{0}, {Eigen::MatrixXd::Identity(2, 2)}, Eigen::VectorXd::Ones(2), N}};
  EXPECT_THROW(solve_degenerate_chain(sys), SingularInnovation);
}

TEST(Solver, MalformedSystemsAreRejected) {
  std::mt19937_64 rng(7);
  LinearizedSystem sys = random_system(3, 3, 2, false, rng);
  sys.process_covs.pop_back();
  EXPECT_THROW(solve_degenerate_chain(sys), InvalidArgument);
  sys = random_system(3, 3, 2, false, rng);
  sys.measurements[0].states[0] = 7;
  EXPECT_THROW(solve_degenerate_chain(sys), InvalidArgument);
  sys = random_system(3, 3, 2, false, rng);
  sys.measurements[0].jacobians[0] = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(solve_degenerate_chain(sys), InvalidArgument);
}

TEST(Cost, MatchesDenseQuadraticForm) {
  std::mt19937_64 rng(8);
  const LinearizedSystem sys = random_system(3, 4, 3, false, rng);
  double expected = 0.0;
  const Eigen::MatrixXd P0 = sys.prior_basis * sys.prior_coeff_cov * sys.prior_basis.transpose();
  expected += sys.prior_offset.dot(P0.ldlt().solve(sys.prior_offset));
  for (std::size_t i = 0; i < sys.process_covs.size(); ++i) {
    expected += sys.transition_offsets[i].dot(sys.process_covs[i].ldlt().solve(sys.transition_offsets[i]));
  }
  for (const auto& m : sys.measurements) expected += m.innovation.dot(m.noise_cov.ldlt().solve(m.innovation));
  EXPECT_NEAR(linearized_cost(sys), expected, 1e-9 * expected);
}

}  // namespace
}  // namespace invsmooth
