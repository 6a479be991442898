// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Gauss-Newton smoothing on factor chains:
//
//   x_0 ~ N_L(prior.mean, E S E^T),  x_{i+1} = f_i(x_i) [* exp(w_i)],  y_k = h(x_k) + n_k.

#pragma once

#include <utility>
#include <vector>

#include "invsmooth/smoother/linear_system.hpp"
#include "invsmooth/smoother/problem.hpp"
#include "invsmooth/smoother/retraction.hpp"

namespace invsmooth {

struct LinearizeOptions {
  /// Check that J_0^-1 maps span(E) into itself (tolerance 1e-9) and throw
  /// LinearizationFailure otherwise. Only meaningful for subalgebra priors.
  bool verify_prior_invariance = false;
};

/// Linearises the negative log-posterior around `states` in the coordinates
/// of `kind`. Throws LinearizationFailure when a residual hits the log cut
/// locus or the prior invariance check fails.
LinearizedSystem linearize(const FactorChainProblem& problem, const std::vector<GroupElement>& states,
                           RetractionKind kind, const LinearizeOptions& opts = {});

struct GaussNewtonOptions {
  double tol = 1e-10;
  int max_iters = 50;
  /// Regenerate states 1..n by stepping from state 0 before iterating.
  bool project_init = false;
  bool verify_prior_invariance = false;
  bool keep_increments = false;
  bool keep_states = false;
  bool compute_covariances = false;
};

TrajectoryEstimate gauss_newton(const FactorChainProblem& problem, const std::vector<GroupElement>& init,
                                RetractionKind kind, const GaussNewtonOptions& opts = {});

/// Removes state 0 and installs an equivalent prior on state 1.
///
/// Without measurements on state 0 the prior is pushed through the first
/// step analytically (exact for the invariant kind). Otherwise the factors
/// touching state 0 are linearised at the estimate and the marginal of
/// state 1 becomes the new prior, spanned by the range of its covariance.
std::pair<FactorChainProblem, TrajectoryEstimate> marginalize_oldest(const FactorChainProblem& problem,
                                                                     const TrajectoryEstimate& est,
                                                                     RetractionKind kind);

/// States generated by stepping the dynamics from `x0`.
std::vector<GroupElement> propagate_states(const FactorChainProblem& problem, const GroupElement& x0);

double trajectory_length(const std::vector<GroupElement>& states);

/// max_i |log(f_i(x_i)^-1 x_{i+1})|; +inf if a residual is at the cut locus.
double max_dynamics_residual(const FactorChainProblem& problem, const std::vector<GroupElement>& states);

/// Distance of log(prior.mean^-1 x0) from span(prior.basis).
double subspace_residual(const DegeneratePrior& prior, const GroupElement& x0);

/// Norm of the component of v orthogonal to span(basis).
double orthogonal_residual(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& v);

/// Prior whose basis spans the numerical range of `cov` (eigenvalues above
/// rel_tol * largest), with the matching diagonal coefficient covariance.
DegeneratePrior prior_from_covariance(const GroupElement& mean, const Eigen::Ref<const Eigen::MatrixXd>& cov,
                                      double rel_tol = 1e-12);

}  // namespace invsmooth
