// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/smoother/linear_system.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <limits>
#include <string>

#include "invsmooth/errors.hpp"

namespace invsmooth {

namespace {

constexpr double kMaxInnovationCondition = 1e12;

double psd_pinv_norm2(const Eigen::MatrixXd& cov, const Eigen::VectorXd& v) {
  if (cov.isZero(0.0)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double cutoff = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * v;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < proj.size(); ++k) {
    if (es.eigenvalues()(k) > cutoff) acc += proj(k) * proj(k) / es.eigenvalues()(k);
  }
  return acc;
}

}  // namespace

int LinearizedSystem::measurement_rows() const {
  int m = 0;
  for (const auto& meas : measurements) m += static_cast<int>(meas.innovation.size());
  return m;
}

void LinearizedSystem::validate() const {
  const auto n = static_cast<std::size_t>(num_states() - 1);
  if (dim <= 0) throw InvalidArgument("linear system: dim must be positive");
  if (process_covs.size() != n || transition_offsets.size() != n) {
    throw InvalidArgument("linear system: per-step arrays disagree in length");
  }
  if (prior_basis.rows() != dim || prior_coeff_cov.rows() != prior_basis.cols() ||
      prior_coeff_cov.cols() != prior_basis.cols() || prior_offset.size() != dim) {
    throw InvalidArgument("linear system: prior block has wrong shape");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (transitions[i].rows() != dim || transitions[i].cols() != dim || process_covs[i].rows() != dim ||
        process_covs[i].cols() != dim || transition_offsets[i].size() != dim) {
      throw InvalidArgument("linear system: step " + std::to_string(i) + " has wrong shape");
    }
  }
  for (const auto& meas : measurements) {
    const Eigen::Index r = meas.innovation.size();
    if (meas.states.size() != meas.jacobians.size() || meas.noise_cov.rows() != r || meas.noise_cov.cols() != r) {
      throw InvalidArgument("linear system: malformed measurement");
    }
    for (std::size_t j = 0; j < meas.states.size(); ++j) {
      if (meas.states[j] < 0 || meas.states[j] >= num_states()) {
        throw InvalidArgument("linear system: measurement state index out of range");
      }
      if (meas.jacobians[j].rows() != r || meas.jacobians[j].cols() != dim) {
        throw InvalidArgument("linear system: measurement Jacobian has wrong shape");
      }
    }
  }
}

ChainSolution solve_degenerate_chain(const LinearizedSystem& sys) {
  sys.validate();
  const int q = sys.dim;
  const int n_states = sys.num_states();
  const int m = sys.measurement_rows();

  ChainSolution sol;

  // H^T, then L^T = A^-T H^T by backward substitution on the upper
  // bidiagonal A^T:  Z_i = H_i^T + F_i^T Z_{i+1}.
  Eigen::MatrixXd lt = Eigen::MatrixXd::Zero(n_states * q, m);
  Eigen::VectorXd nhat(m);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(m, m);
  {
    int row = 0;
    for (const auto& meas : sys.measurements) {
      const auto r = static_cast<int>(meas.innovation.size());
      for (std::size_t j = 0; j < meas.states.size(); ++j) {
        lt.block(meas.states[j] * q, row, q, r) += meas.jacobians[j].transpose();
      }
      nhat.segment(row, r) = meas.innovation;
      noise.block(row, row, r, r) = meas.noise_cov;
      row += r;
    }
  }
  for (int i = n_states - 2; i >= 0; --i) {
    lt.middleRows(i * q, q) += sys.transitions[i].transpose() * lt.middleRows((i + 1) * q, q);
  }

  // Pi L^T, block by block.
  Eigen::MatrixXd pi_lt(n_states * q, m);
  pi_lt.topRows(q) =
      sys.prior_basis * (sys.prior_coeff_cov * (sys.prior_basis.transpose() * lt.topRows(q)));
  for (int i = 0; i + 1 < n_states; ++i) {
    pi_lt.middleRows((i + 1) * q, q) = sys.process_covs[i] * lt.middleRows((i + 1) * q, q);
  }

  // Stacked b.
  Eigen::VectorXd b(n_states * q);
  b.head(q) = sys.prior_offset;
  for (int i = 0; i + 1 < n_states; ++i) b.segment((i + 1) * q, q) = sys.transition_offsets[i];

  Eigen::VectorXd c = b;
  if (m > 0) {
    Eigen::MatrixXd innov = lt.transpose() * pi_lt + noise;
    innov = (0.5 * (innov + innov.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(innov, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    sol.innovation_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(sol.innovation_condition <= kMaxInnovationCondition)) {
      throw SingularInnovation("innovation covariance condition number " +
                               std::to_string(sol.innovation_condition) + " exceeds 1e12");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(innov);
    sol.gain = llt.solve(pi_lt.transpose()).transpose();
    const Eigen::VectorXd innovation = nhat - lt.transpose() * b;
    c += sol.gain * innovation;
    sol.innovation_cov = std::move(innov);
  } else {
    sol.gain = Eigen::MatrixXd::Zero(n_states * q, 0);
    sol.innovation_cov = Eigen::MatrixXd::Zero(0, 0);
  }

  // xi = A^-1 c by forward substitution.
  sol.increments.resize(n_states);
  sol.increments[0] = c.head(q);
  for (int i = 0; i + 1 < n_states; ++i) {
    sol.increments[i + 1] = c.segment((i + 1) * q, q) + sys.transitions[i] * sol.increments[i];
  }
  sol.lt = std::move(lt);
  sol.pi_lt = std::move(pi_lt);
  return sol;
}

Eigen::MatrixXd posterior_covariance(const LinearizedSystem& sys, const ChainSolution& sol, int i) {
  const int q = sys.dim;
  if (i < 0 || i >= sys.num_states()) throw InvalidArgument("posterior_covariance: index out of range");

  // xi_i = sum_{j<=i} W_j c_j with W_i = I, W_j = W_{j+1} F_j.
  Eigen::MatrixXd prior_part = Eigen::MatrixXd::Zero(q, q);
  Eigen::MatrixXd w_pi_lt = Eigen::MatrixXd::Zero(q, sol.pi_lt.cols());
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(q, q);
  for (int j = i; j >= 0; --j) {
    const Eigen::MatrixXd pi_j =
        j == 0 ? Eigen::MatrixXd(sys.prior_basis * sys.prior_coeff_cov * sys.prior_basis.transpose())
               : sys.process_covs[j - 1];
    prior_part += W * pi_j * W.transpose();
    if (sol.pi_lt.cols() > 0) w_pi_lt += W * sol.pi_lt.middleRows(j * q, q);
    if (j > 0) W = (W * sys.transitions[j - 1]).eval();
  }
  if (sol.pi_lt.cols() == 0) return prior_part;
  const Eigen::LLT<Eigen::MatrixXd> llt(sol.innovation_cov);
  Eigen::MatrixXd cov = prior_part - w_pi_lt * llt.solve(w_pi_lt.transpose());
  return 0.5 * (cov + cov.transpose());
}

double linearized_cost(const LinearizedSystem& sys) {
  double cost = 0.0;
  if (sys.prior_basis.cols() > 0) {
    const Eigen::VectorXd alpha = sys.prior_basis.colPivHouseholderQr().solve(sys.prior_offset);
    cost += alpha.dot(sys.prior_coeff_cov.ldlt().solve(alpha));
  }
  for (std::size_t i = 0; i < sys.process_covs.size(); ++i) {
    cost += psd_pinv_norm2(sys.process_covs[i], sys.transition_offsets[i]);
  }
  for (const auto& meas : sys.measurements) {
    cost += meas.innovation.dot(meas.noise_cov.llt().solve(meas.innovation));
  }
  return cost;
}

}  // namespace invsmooth
