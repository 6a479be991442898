// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/models.hpp"

#include <cmath>

#include "invsmooth/errors.hpp"
#include "invsmooth/lie/se23.hpp"

namespace invsmooth::models {

DegeneratePrior robot2d_prior(const Robot2dConfig& cfg) {
  return DegeneratePrior{
      make_se2(cfg.true_heading + cfg.heading_error, cfg.initial_position),
      Eigen::Vector3d(0.0, 0.0, 1.0),
      Eigen::MatrixXd::Constant(1, 1, cfg.heading_sigma * cfg.heading_sigma),
  };
}

GroupAffineStep robot2d_step(const Robot2dConfig& cfg) {
  GroupAffineStep s = GroupAffineStep::identity(GroupId::SE2);
  s.upsilon = make_se2(0.0, Eigen::Vector2d(cfg.speed * cfg.dt, 0.0));
  s.dt = cfg.dt;
  return s;
}

int InsConfig::imu_per_gps() const {
  const double ratio = imu_rate / gps_rate;
  const double rounded = std::round(ratio);
  if (!(gps_rate > 0.0) || !(imu_rate > 0.0) || std::abs(ratio - rounded) > 1e-9 || rounded < 1.0) {
    throw InvalidArgument("imu_rate must be a positive integer multiple of gps_rate");
  }
  return static_cast<int>(rounded);
}

void InsConfig::validate() const {
  imu_per_gps();
  if (window_size < 2) throw InvalidArgument("window_size must be at least 2");
  if (sigma_g_deg_s < 0 || sigma_a < 0 || sigma_n <= 0 || sigma_p0 < 0 || sigma_v0 <= 0 ||
      sigma_yaw0_deg <= 0 || sigma_tilt0_deg <= 0) {
    throw InvalidArgument("noise sigmas must be non-negative (GPS and prior sigmas positive)");
  }
  if (stationary_duration < 0 || moving_duration < 0 || cruise_speed < 0) {
    throw InvalidArgument("scenario durations and speed must be non-negative");
  }
}

ImuNoise ImuNoise::from_config(const InsConfig& cfg) {
  return ImuNoise{cfg.sigma_g_deg_s * kDegToRad, cfg.sigma_a};
}

GroupAffineStep ins_step(const Eigen::Vector3d& omega, const Eigen::Vector3d& accel, double dt,
                         const Eigen::Vector3d& gravity, const ImuNoise& noise) {
  if (!(dt > 0.0)) throw InvalidArgument("ins_step: dt must be positive");
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  MatQ q_cov = MatQ::Zero(9, 9);
  q_cov.block(0, 0, 3, 3) = noise.sigma_g * noise.sigma_g * dt * I;
  q_cov.block(3, 3, 3, 3) = noise.sigma_a * noise.sigma_a * dt * I;
  return GroupAffineStep{
      GroupElement::unchecked(GroupId::SE23, se23::make<double>(I, dt * gravity, Eigen::Vector3d::Zero())),
      Automorphism::position_shift(dt),
      GroupElement::unchecked(GroupId::SE23, se23::make<double>(so3::exp(Eigen::Vector3d(dt * omega)), dt * accel,
                                                       Eigen::Vector3d::Zero())),
      q_cov,
      dt,
  };
}

DegeneratePrior ins_prior(const InsConfig& cfg, const GroupElement& mean) {
  if (mean.group() != GroupId::SE23) throw GroupMismatch("ins_prior needs an SE23 mean");
  const bool position_uncertain = cfg.sigma_p0 > 0.0;
  const int p = position_uncertain ? 9 : 6;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(9, p);
  basis.topLeftCorner(p, p).setIdentity();
  Eigen::VectorXd sd(p);
  const double tilt = cfg.sigma_tilt0_deg * kDegToRad;
  sd.head<6>() << tilt, tilt, cfg.sigma_yaw0_deg * kDegToRad, cfg.sigma_v0, cfg.sigma_v0, cfg.sigma_v0;
  if (position_uncertain) sd.tail<3>().setConstant(cfg.sigma_p0);
  return DegeneratePrior{mean, basis, sd.cwiseAbs2().asDiagonal()};
}

MeasurementPrediction gps_measurement(GroupId group, const GroupElement& est) {
  if (est.group() != group) throw GroupMismatch("gps_measurement: estimate group mismatch");
  MeasurementPrediction out;
  switch (group) {
    case GroupId::SE2:
      out.predicted = est.position();
      out.jacobian = Eigen::MatrixXd::Zero(2, 3);
      out.jacobian.leftCols(2) = est.rotation();
      return out;
    case GroupId::SE23:
      out.predicted = est.position();
      out.jacobian = Eigen::MatrixXd::Zero(3, 9);
      out.jacobian.rightCols(3) = est.rotation();
      return out;
    default: throw InvalidArgument("gps_measurement needs SE2 or SE23");
  }
}

}  // namespace invsmooth::models
