// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Group-affine transitions  x_{i+1} = Gamma * Phi(x_i) * Upsilon.

#pragma once

#include <Eigen/Core>
#include <random>
#include <span>

#include "invsmooth/lie/group.hpp"

namespace invsmooth {

/// One group-affine transition. q_cov is the covariance of w in the noise
/// model Upsilon_true = Upsilon * exp(w); it may be exactly zero.
struct GroupAffineStep {
  GroupElement gamma;
  Automorphism phi;
  GroupElement upsilon;
  MatQ q_cov;
  double dt = 0.0;

  static GroupAffineStep identity(GroupId g);

  GroupId group() const { return gamma.group(); }

  /// Shared group, supported automorphism, symmetric PSD q_cov.
  void validate() const;
};

/// Gamma * Phi(x) * Upsilon.
GroupElement step(const GroupAffineStep& s, const GroupElement& x);

/// F = Ad_{Upsilon^-1} M, so that f(x exp(v)) = f(x) exp(F v) exactly.
MatQ log_linear_matrix(const GroupAffineStep& s);

/// F P F^T + Q.
MatQ propagate_noise(const GroupAffineStep& s, const Eigen::Ref<const Eigen::MatrixXd>& p_in);

/// Composes a window of steps (applied front to back) into one step whose
/// mean output equals sequential stepping and whose q_cov is the first-order
/// covariance of the composed increment.
///
/// Throws InvalidArgument on an empty window, NonComposable when the
/// automorphisms leave the supported family or the composed mean disagrees
/// with sequential stepping by more than 1e-9.
GroupAffineStep preintegrate(std::span<const GroupAffineStep> steps);

/// Reachable set { anchor * exp(basis * alpha) }.
struct ReachableSubspace {
  GroupElement anchor;
  Eigen::MatrixXd basis;
};

/// anchor <- step(anchor), basis <- F basis. Throws RankCollapse when the
/// propagated basis loses column rank (threshold 1e-10).
ReachableSubspace propagate_subspace(const GroupAffineStep& s, const ReachableSubspace& r);

/// Realises the process noise: Upsilon <- Upsilon exp(w), w ~ N(0, q_cov),
/// and zeroes q_cov on the returned step.
GroupAffineStep sample_noisy_step(const GroupAffineStep& s, std::mt19937_64& rng);

/// Draws w ~ N(0, cov) for a PSD (possibly singular) covariance.
Eigen::VectorXd sample_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& cov, std::mt19937_64& rng);

/// Column rank via column-pivoted QR with threshold rel_tol * max|R_ii|.
int numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double rel_tol = 1e-10);

}  // namespace invsmooth
