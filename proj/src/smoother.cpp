// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/smoother/smoother.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "invsmooth/errors.hpp"
#include "invsmooth/models.hpp"

namespace invsmooth {

namespace {

constexpr double kPriorInvarianceTol = 1e-9;

// Coordinates of a possibly cut-locus residual, reported as a linearisation
// failure rather than a raw domain error.
VecQ checked_log(const GroupElement& g, const char* what) {
  try {
    return log(g);
  } catch (const AngleAtCut& e) {
    throw LinearizationFailure(std::string(what) + ": " + e.what());
  }
}

LinearMeasurement linearize_measurement(const MeasurementFactor& m, const GroupElement& est, RetractionKind kind) {
  const GroupId g = est.group();
  const models::MeasurementPrediction pred = models::gps_measurement(g, est);
  LinearMeasurement out;
  out.states = m.states;
  out.jacobians.emplace_back(pred.jacobian * tangent_map(kind, est));
  out.innovation = m.value - pred.predicted;
  out.noise_cov = m.noise_cov;
  return out;
}

}  // namespace

LinearizedSystem linearize(const FactorChainProblem& problem, const std::vector<GroupElement>& states,
                           RetractionKind kind, const LinearizeOptions& opts) {
  const int n_states = problem.num_states();
  if (static_cast<int>(states.size()) != n_states) {
    throw InvalidArgument("linearize: need one estimate per state");
  }
  const GroupId g = problem.group();
  for (const auto& s : states) {
    if (s.group() != g) throw GroupMismatch("linearize: estimate on a different group");
  }
  const int q = tangent_dim(g);

  LinearizedSystem sys;
  sys.dim = q;

  // The prior is Gaussian in the retraction coordinates of `kind` around the
  // prior mean: local(mean, x_0) = E a. With x_0 = est_0 (+) xi_0 this gives
  // xi_0 = -J0^-1 p0 + J0^-1 E a to first order.
  VecQ p0;
  try {
    p0 = local_coordinates(kind, problem.prior.mean, states[0]);
  } catch (const AngleAtCut& e) {
    throw LinearizationFailure(std::string("prior residual: ") + e.what());
  }
  const Eigen::MatrixXd J0 = local_coordinates_jacobian(kind, problem.prior.mean, states[0]);
  const Eigen::PartialPivLU<Eigen::MatrixXd> J0_lu(J0);
  sys.prior_basis = J0_lu.solve(problem.prior.basis);
  sys.prior_coeff_cov = problem.prior.coeff_cov;
  sys.prior_offset = -J0_lu.solve(Eigen::VectorXd(p0));

  if (opts.verify_prior_invariance) {
    for (Eigen::Index c = 0; c < sys.prior_basis.cols(); ++c) {
      const double off = orthogonal_residual(problem.prior.basis, sys.prior_basis.col(c));
      if (off > kPriorInvarianceTol * std::max(1.0, sys.prior_basis.col(c).norm())) {
        throw LinearizationFailure("prior basis is not invariant under the local Jacobian");
      }
    }
  }

  sys.transitions.reserve(problem.steps.size());
  for (int i = 0; i + 1 < n_states; ++i) {
    const GroupAffineStep& s = problem.steps[i];
    const VecQ residual = checked_log(step(s, states[i]).inverse() * states[i + 1], "dynamics residual");
    const MatQ T_next_inv = tangent_map(kind, states[i + 1]).inverse();
    sys.transitions.emplace_back(retraction_jacobian(kind, s, states[i], states[i + 1]));
    sys.transition_offsets.emplace_back(-(T_next_inv * residual));
    sys.process_covs.emplace_back(T_next_inv * s.q_cov * T_next_inv.transpose());
  }

  sys.measurements.reserve(problem.measurements.size());
  for (const auto& m : problem.measurements) {
    sys.measurements.push_back(linearize_measurement(m, states[m.states.at(0)], kind));
  }
  return sys;
}

std::vector<GroupElement> propagate_states(const FactorChainProblem& problem, const GroupElement& x0) {
  std::vector<GroupElement> out;
  out.reserve(problem.steps.size() + 1);
  out.push_back(x0);
  for (const auto& s : problem.steps) out.push_back(step(s, out.back()));
  return out;
}

double trajectory_length(const std::vector<GroupElement>& states) {
  if (states.empty()) return 0.0;
  const GroupId g = states.front().group();
  if (g != GroupId::SE2 && g != GroupId::SE23) return 0.0;
  double len = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) len += (states[i].position() - states[i - 1].position()).norm();
  return len;
}

double max_dynamics_residual(const FactorChainProblem& problem, const std::vector<GroupElement>& states) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < states.size() && i < problem.steps.size(); ++i) {
    try {
      worst = std::max(worst, log(step(problem.steps[i], states[i]).inverse() * states[i + 1]).norm());
    } catch (const AngleAtCut&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

double orthogonal_residual(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (basis.cols() == 0) return v.norm();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::VectorXd coeffs = qr.solve(Eigen::VectorXd(v));
  return (v - basis * coeffs).norm();
}

double subspace_residual(const DegeneratePrior& prior, const GroupElement& x0) {
  try {
    return orthogonal_residual(prior.basis, log(prior.mean.inverse() * x0));
  } catch (const AngleAtCut&) {
    return std::numeric_limits<double>::infinity();
  }
}

DegeneratePrior prior_from_covariance(const GroupElement& mean, const Eigen::Ref<const Eigen::MatrixXd>& cov,
                                      double rel_tol) {
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (top > 0.0 && lambda(k) > rel_tol * top) keep.push_back(k);
  }
  const auto p = static_cast<Eigen::Index>(keep.size());
  DegeneratePrior out{mean, Eigen::MatrixXd(cov.rows(), p), Eigen::MatrixXd::Zero(p, p)};
  for (Eigen::Index c = 0; c < p; ++c) {
    out.basis.col(c) = es.eigenvectors().col(keep[c]);
    out.coeff_cov(c, c) = lambda(keep[c]);
  }
  return out;
}

TrajectoryEstimate gauss_newton(const FactorChainProblem& problem, const std::vector<GroupElement>& init,
                                RetractionKind kind, const GaussNewtonOptions& opts) {
  problem.validate();
  if (static_cast<int>(init.size()) != problem.num_states()) {
    throw InvalidArgument("gauss_newton: need one initial estimate per state");
  }
  if (opts.max_iters < 0 || !(opts.tol > 0.0)) throw InvalidArgument("gauss_newton: bad options");

  TrajectoryEstimate est;
  est.states = opts.project_init ? propagate_states(problem, init.front()) : init;

  const LinearizeOptions lin_opts{opts.verify_prior_invariance};
  auto record = [&](int iteration, const LinearizedSystem& sys, double step_norm,
                    const std::vector<Eigen::VectorXd>* increments) {
    IterationRecord r;
    r.iteration = iteration;
    r.trajectory_length = trajectory_length(est.states);
    r.max_dynamics_residual = max_dynamics_residual(problem, est.states);
    r.subspace_residual = subspace_residual(problem.prior, est.states.front());
    r.linearized_cost = linearized_cost(sys);
    r.step_norm = step_norm;
    if (opts.keep_increments && increments != nullptr) r.increments = *increments;
    if (opts.keep_states) r.states = est.states;
    est.iteration_log.push_back(std::move(r));
  };

  LinearizedSystem sys = linearize(problem, est.states, kind, lin_opts);
  record(0, sys, 0.0, nullptr);

  int rising = 0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const ChainSolution sol = solve_degenerate_chain(sys);
    double step_norm = 0.0;
    for (std::size_t i = 0; i < est.states.size(); ++i) {
      est.states[i] = apply_retraction(kind, est.states[i], sol.increments[i]);
      step_norm = std::max(step_norm, sol.increments[i].lpNorm<Eigen::Infinity>());
    }
    const double previous_cost = est.iteration_log.back().linearized_cost;
    sys = linearize(problem, est.states, kind, lin_opts);
    record(it, sys, step_norm, &sol.increments);

    rising = est.iteration_log.back().linearized_cost > previous_cost ? rising + 1 : 0;
    if (rising >= 2) est.non_decreasing_cost = true;
    if (step_norm < opts.tol) {
      est.converged = true;
      break;
    }
  }

  if (opts.compute_covariances) {
    const ChainSolution sol = solve_degenerate_chain(sys);
    est.covariances.reserve(est.states.size());
    for (int i = 0; i < problem.num_states(); ++i) est.covariances.push_back(posterior_covariance(sys, sol, i));
  }
  return est;
}

std::pair<FactorChainProblem, TrajectoryEstimate> marginalize_oldest(const FactorChainProblem& problem,
                                                                     const TrajectoryEstimate& est,
                                                                     RetractionKind kind) {
  problem.validate();
  if (problem.num_states() < 2) throw InvalidArgument("marginalize_oldest: need at least two states");
  if (static_cast<int>(est.states.size()) != problem.num_states()) {
    throw InvalidArgument("marginalize_oldest: estimate does not match the problem");
  }

  std::vector<GroupAffineStep> steps(problem.steps.begin() + 1, problem.steps.end());
  std::vector<MeasurementFactor> kept;
  std::vector<MeasurementFactor> on_first;
  for (const auto& m : problem.measurements) {
    if (m.states.at(0) == 0) {
      on_first.push_back(m);
    } else {
      MeasurementFactor shifted = m;
      for (int& idx : shifted.states) --idx;
      kept.push_back(std::move(shifted));
    }
  }

  const GroupAffineStep& s0 = problem.steps.front();
  auto next_prior = [&]() -> DegeneratePrior {
    if (on_first.empty()) {
      // Push the prior through the first step. In the invariant coordinates
      // f(m exp(E a)) = f(m) exp(F E a) exactly; the other kinds use the
      // Jacobian of their own coordinates at the propagated mean.
      const GroupElement mean = step(s0, problem.prior.mean);
      const MatQ F = retraction_jacobian(kind, s0, problem.prior.mean, mean);
      const MatQ T_inv = tangent_map(kind, mean).inverse();
      const Eigen::MatrixXd Q = T_inv * s0.q_cov * T_inv.transpose();
      const Eigen::MatrixXd FE = F * problem.prior.basis;
      if (!Q.isZero(0.0)) return prior_from_covariance(mean, FE * problem.prior.coeff_cov * FE.transpose() + Q);
      if (numerical_rank(FE) != FE.cols()) throw RankCollapse("marginalize_oldest: pushed prior basis lost rank");
      return DegeneratePrior{mean, FE, problem.prior.coeff_cov};
    }
    // Two-state sub-problem holding every factor that touches state 0.
    const FactorChainProblem sub{problem.prior, {s0}, on_first};
    const LinearizedSystem sys = linearize(sub, {est.states[0], est.states[1]}, kind);
    const ChainSolution sol = solve_degenerate_chain(sys);
    const Eigen::MatrixXd C = posterior_covariance(sys, sol, 1);
    return prior_from_covariance(apply_retraction(kind, est.states[1], sol.increments[1]), C);
  };
  FactorChainProblem next{next_prior(), std::move(steps), std::move(kept)};

  TrajectoryEstimate out;
  out.states.assign(est.states.begin() + 1, est.states.end());
  if (!est.covariances.empty()) out.covariances.assign(est.covariances.begin() + 1, est.covariances.end());
  out.converged = est.converged;
  return {std::move(next), std::move(out)};
}

}  // namespace invsmooth
