// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Linear-Gaussian chain in "factor form":
//
//   A Xi = b + w,   w ~ N(0, Pi),   Pi = diag(E S E^T, Q_0, ..., Q_{n-1})
//   nhat = H Xi + n, n ~ N(0, N)
//
// where A is block unit-lower-bidiagonal with -F_i on the sub-diagonal:
//
//   xi_0                    = b_0 + w_0
//   xi_{i+1} - F_i xi_i     = b_{i+1} + w_{i+1}
//
// The prior block and any Q_i may be singular. Solving never inverts Pi.

#pragma once

#include <Eigen/Core>
#include <vector>

namespace invsmooth {

struct LinearMeasurement {
  std::vector<int> states;
  std::vector<Eigen::MatrixXd> jacobians;  // one r x q block per entry of states
  Eigen::VectorXd innovation;              // nhat
  Eigen::MatrixXd noise_cov;               // N, SPD
};

struct LinearizedSystem {
  int dim = 0;  // q
  Eigen::MatrixXd prior_basis;     // q x p (already mapped through J_0^-1)
  Eigen::MatrixXd prior_coeff_cov; // p x p
  Eigen::VectorXd prior_offset;    // b_0
  std::vector<Eigen::MatrixXd> transitions;         // F_i
  std::vector<Eigen::MatrixXd> process_covs;        // Q_i
  std::vector<Eigen::VectorXd> transition_offsets;  // b_{i+1}
  std::vector<LinearMeasurement> measurements;

  int num_states() const { return static_cast<int>(transitions.size()) + 1; }
  int measurement_rows() const;

  void validate() const;
};

struct ChainSolution {
  std::vector<Eigen::VectorXd> increments;  // xi_i^*
  /// L^T = A^-T H^T, stacked (n+1)q x m.
  Eigen::MatrixXd lt;
  /// Pi L^T.
  Eigen::MatrixXd pi_lt;
  /// K = Pi L^T (L Pi L^T + N)^-1.
  Eigen::MatrixXd gain;
  /// L Pi L^T + N.
  Eigen::MatrixXd innovation_cov;
  double innovation_condition = 1.0;
};

/// Closed-form solution xi* = A^-1((I - K L) b + K nhat). A^-1 is applied by
/// forward substitution; only L Pi L^T + N is factorised.
/// Throws SingularInnovation when its condition number exceeds 1e12.
ChainSolution solve_degenerate_chain(const LinearizedSystem& sys);

/// Posterior covariance of xi_i.
Eigen::MatrixXd posterior_covariance(const LinearizedSystem& sys, const ChainSolution& sol, int i);

/// Linearised cost at Xi = 0: |b|^2_Pi + |nhat|^2_N, with pseudo-inverses
/// for the singular blocks of Pi.
double linearized_cost(const LinearizedSystem& sys);

}  // namespace invsmooth
