// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/smoother/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <string>

#include "invsmooth/errors.hpp"

namespace invsmooth {

namespace {

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (!m.isApprox(m.transpose(), 1e-9)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

void DegeneratePrior::validate() const {
  const int q = tangent_dim(mean.group());
  if (basis.rows() != q) throw InvalidArgument("prior basis must have one row per tangent coordinate");
  if (basis.cols() > q) throw InvalidArgument("prior basis has more columns than the tangent dimension");
  if (coeff_cov.rows() != basis.cols() || coeff_cov.cols() != basis.cols()) {
    throw InvalidArgument("prior coefficient covariance must be p x p");
  }
  if (basis.cols() > 0 && numerical_rank(basis) != basis.cols()) {
    throw InvalidArgument("prior basis is not full column rank");
  }
  if (!is_spd(coeff_cov)) throw InvalidArgument("prior coefficient covariance is not SPD");
}

double DegeneratePrior::subalgebra_residual() const {
  const auto p = basis.cols();
  if (p < 2) return 0.0;
  const GroupId g = mean.group();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd U = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), p);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const Eigen::VectorXd br = bracket(g, basis.col(i), basis.col(j));
      const Eigen::VectorXd off = br - U * (U.transpose() * br);
      worst = std::max(worst, off.norm());
    }
  }
  return worst;
}

DegeneratePrior DegeneratePrior::dense(const GroupElement& mean, const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  const int q = tangent_dim(mean.group());
  if (cov.rows() != q || cov.cols() != q) throw InvalidArgument("dense prior covariance must be q x q");
  return DegeneratePrior{mean, Eigen::MatrixXd::Identity(q, q), cov};
}

void FactorChainProblem::validate() const {
  prior.validate();
  const GroupId g = group();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].group() != g) throw GroupMismatch("step " + std::to_string(i) + " lives on another group");
    steps[i].validate();
  }
  const int n = num_states();
  for (const auto& m : measurements) {
    if (m.states.size() != 1) throw InvalidArgument("GPS measurements attach to exactly one state");
    if (m.states[0] < 0 || m.states[0] >= n) throw InvalidArgument("measurement state index out of range");
    if (g != GroupId::SE2 && g != GroupId::SE23) throw InvalidArgument("GPS measurements need SE2 or SE23");
    const int r = g == GroupId::SE2 ? 2 : 3;
    if (m.value.size() != r) throw InvalidArgument("GPS measurement has the wrong dimension");
    if (!is_spd(m.noise_cov) || m.noise_cov.rows() != r) throw InvalidArgument("measurement noise is not SPD");
  }
}

}  // namespace invsmooth
