// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "invsmooth/dynamics.hpp"
#include "invsmooth/lie/group.hpp"

namespace invsmooth {

/// Left-concentrated Gaussian x = mean * exp(basis * a), a ~ N(0, coeff_cov).
/// The tangent covariance basis * coeff_cov * basis^T may be rank deficient.
struct DegeneratePrior {
  GroupElement mean;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd coeff_cov;

  Eigen::MatrixXd covariance() const { return basis * coeff_cov * basis.transpose(); }

  /// Full column rank basis and SPD coefficient covariance.
  void validate() const;

  /// Largest norm of the part of a pairwise bracket [eta_i, eta_j] that
  /// leaves span(basis). Zero for a Lie subalgebra.
  double subalgebra_residual() const;
  bool is_subalgebra(double tol = 1e-9) const { return subalgebra_residual() < tol; }

  /// Full-rank prior with identity basis.
  static DegeneratePrior dense(const GroupElement& mean, const Eigen::Ref<const Eigen::MatrixXd>& cov);
};

enum class MeasurementModel { Gps };

/// y = h(x_{states}) + n, n ~ N(0, noise_cov).
struct MeasurementFactor {
  std::vector<int> states;
  Eigen::VectorXd value;
  Eigen::MatrixXd noise_cov;
  MeasurementModel model = MeasurementModel::Gps;
};

struct FactorChainProblem {
  DegeneratePrior prior;
  std::vector<GroupAffineStep> steps;
  std::vector<MeasurementFactor> measurements;

  GroupId group() const { return prior.mean.group(); }
  int num_states() const { return static_cast<int>(steps.size()) + 1; }

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double trajectory_length = 0.0;
  /// max_i |log(f_i(x_i)^-1 x_{i+1})|
  double max_dynamics_residual = 0.0;
  /// Distance of log(prior_mean^-1 x_0) from span(prior basis).
  double subspace_residual = 0.0;
  /// Linearised cost at the current estimate (zero increment).
  double linearized_cost = 0.0;
  /// Infinity norm of the increment that produced this iterate (0 for the
  /// initial record).
  double step_norm = 0.0;
  /// Increments and states of this iterate, when requested by the options.
  std::vector<Eigen::VectorXd> increments;
  std::vector<GroupElement> states;
};

struct TrajectoryEstimate {
  std::vector<GroupElement> states;
  std::vector<IterationRecord> iteration_log;
  std::vector<Eigen::MatrixXd> covariances;
  bool converged = false;
  /// Set when the linearised cost increased on two consecutive iterations.
  bool non_decreasing_cost = false;
};

}  // namespace invsmooth
