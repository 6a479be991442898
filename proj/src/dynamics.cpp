// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "invsmooth/errors.hpp"

namespace invsmooth {

namespace {

constexpr double kComposeTol = 1e-9;

// Fixed, non-trivial probe used to check that a composed step reproduces
// sequential stepping away from the identity.
GroupElement probe_element(GroupId g) {
  Eigen::VectorXd v(tangent_dim(g));
  for (int i = 0; i < v.size(); ++i) v(i) = 0.3 * std::sin(1.7 * (i + 1));
  return exp(g, v);
}

GroupAffineStep compose_pair(const GroupAffineStep& first, const GroupAffineStep& second) {
  const auto phi = compose(second.phi, first.phi);
  if (!phi) throw NonComposable("automorphisms do not compose within the supported family");
  const MatQ F2 = log_linear_matrix(second);
  return GroupAffineStep{
      second.gamma * apply(second.phi, first.gamma),
      *phi,
      apply(second.phi, first.upsilon) * second.upsilon,
      F2 * first.q_cov * F2.transpose() + second.q_cov,
      first.dt + second.dt,
  };
}

}  // namespace

GroupAffineStep GroupAffineStep::identity(GroupId g) {
  const int q = tangent_dim(g);
  return {GroupElement::identity(g), Automorphism::identity(), GroupElement::identity(g),
          MatQ::Zero(q, q), 0.0};
}

void GroupAffineStep::validate() const {
  const GroupId g = gamma.group();
  if (upsilon.group() != g) throw GroupMismatch("gamma and upsilon belong to different groups");
  check_supported(g, phi);
  const int q = tangent_dim(g);
  if (q_cov.rows() != q || q_cov.cols() != q) throw InvalidArgument("q_cov has wrong size");
  if ((q_cov - q_cov.transpose()).norm() > 1e-12 * std::max(1.0, q_cov.norm())) {
    throw InvalidArgument("q_cov is not symmetric");
  }
  if (!q_cov.isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<MatQ> es(q_cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw InvalidArgument("q_cov is not PSD");
  }
}

GroupElement step(const GroupAffineStep& s, const GroupElement& x) {
  if (x.group() != s.group()) throw GroupMismatch("step applied to an element of another group");
  return s.gamma * apply(s.phi, x) * s.upsilon;
}

MatQ log_linear_matrix(const GroupAffineStep& s) {
  return adjoint(s.upsilon.inverse()) * automorphism_matrix(s.group(), s.phi);
}

MatQ propagate_noise(const GroupAffineStep& s, const Eigen::Ref<const Eigen::MatrixXd>& p_in) {
  const MatQ F = log_linear_matrix(s);
  return F * p_in * F.transpose() + s.q_cov;
}

GroupAffineStep preintegrate(std::span<const GroupAffineStep> steps) {
  if (steps.empty()) throw InvalidArgument("preintegrate: empty window");
  GroupAffineStep acc = steps.front();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].group() != acc.group()) throw GroupMismatch("preintegrate: mixed groups");
    acc = compose_pair(acc, steps[i]);
  }

  for (const GroupElement& x : {GroupElement::identity(acc.group()), probe_element(acc.group())}) {
    GroupElement seq = x;
    for (const auto& s : steps) seq = step(s, seq);
    const double err = step(acc, x).distance(seq);
    if (err > kComposeTol * std::max(1.0, seq.matrix().norm())) {
      throw NonComposable("preintegrated step disagrees with sequential stepping");
    }
  }
  return acc;
}

int numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double rel_tol) {
  if (m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  const double top = qr.matrixQR().diagonal().cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

ReachableSubspace propagate_subspace(const GroupAffineStep& s, const ReachableSubspace& r) {
  ReachableSubspace out{step(s, r.anchor), log_linear_matrix(s) * r.basis};
  if (numerical_rank(out.basis) < r.basis.cols()) {
    throw RankCollapse("propagated reachable basis lost column rank");
  }
  return out;
}

Eigen::VectorXd sample_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& cov, std::mt19937_64& rng) {
  const Eigen::Index n = cov.rows();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  if (cov.isZero(0.0)) return Eigen::VectorXd::Zero(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * sd.cwiseProduct(z);
}

GroupAffineStep sample_noisy_step(const GroupAffineStep& s, std::mt19937_64& rng) {
  GroupAffineStep out = s;
  const int q = tangent_dim(s.group());
  out.q_cov = MatQ::Zero(q, q);
  if (s.q_cov.isZero(0.0)) return out;
  out.upsilon = s.upsilon * exp(s.group(), sample_gaussian(s.q_cov, rng));
  return out;
}

}  // namespace invsmooth
