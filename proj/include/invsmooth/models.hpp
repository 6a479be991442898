// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Concrete problems: the SE(2) wheeled robot on a straight line and the
// SE_2(3) unbiased strapdown INS, with their GPS measurement model.

#pragma once

#include <Eigen/Core>
#include <numbers>

#include "invsmooth/dynamics.hpp"
#include "invsmooth/smoother/problem.hpp"

namespace invsmooth::models {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Robot2dConfig {
  double speed = 7.0;  // m/s
  double dt = 1.0;     // s
  int n_steps = 10;
  Eigen::Matrix2d gps_cov = Eigen::Matrix2d::Identity();  // m^2
  double heading_error = -3.0 * std::numbers::pi / 4.0;   // rad, prior mean minus truth
  double true_heading = 0.0;                              // rad
  Eigen::Vector2d initial_position = Eigen::Vector2d::Zero();
  /// Standard deviation of the rank-1 heading prior.
  double heading_sigma = 3.0 * std::numbers::pi / 4.0;
};

/// Heading-only prior: mean at the wrong heading and the known position,
/// basis xi_theta = (0, 0, 1).
DegeneratePrior robot2d_prior(const Robot2dConfig& cfg);

/// Gamma = I, Phi = Identity, Upsilon = (I, speed * dt * (1, 0)), zero noise.
GroupAffineStep robot2d_step(const Robot2dConfig& cfg);

struct InsConfig {
  double imu_rate = 200.0;  // Hz
  double gps_rate = 1.0;    // Hz
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  double sigma_g_deg_s = 2.7e-4;  // deg/s
  double sigma_a = 1.5e-3;        // m/s^2
  double sigma_n = 3.0;           // m
  double sigma_p0 = 0.0;          // m
  double sigma_v0 = 10.0;         // m/s
  double sigma_yaw0_deg = 100.0;
  double sigma_tilt0_deg = 1.0;   // roll and pitch
  int window_size = 50;
  double heading_error_deg = 80.0;
  double true_yaw_deg = 0.0;
  double stationary_duration = 15.0;  // s
  double moving_duration = 25.0;      // s
  double cruise_speed = 10.0;         // m/s

  double imu_dt() const { return 1.0 / imu_rate; }
  /// IMU samples between two GPS fixes. Throws unless imu_rate is an integer
  /// multiple of gps_rate.
  int imu_per_gps() const;
  void validate() const;
};

/// Per-sample IMU noise densities in SI units.
struct ImuNoise {
  double sigma_g = 0.0;  // rad/s
  double sigma_a = 0.0;  // m/s^2

  static ImuNoise from_config(const InsConfig& cfg);
};

/// One strapdown step:
///   Gamma = (I, dt g, 0), Phi = PositionShift(dt), Upsilon = (exp(dt omega), dt a, 0),
///   q_cov = diag(sigma_g^2 I, sigma_a^2 I, 0) dt.
GroupAffineStep ins_step(const Eigen::Vector3d& omega, const Eigen::Vector3d& accel, double dt,
                         const Eigen::Vector3d& gravity, const ImuNoise& noise);

/// Prior with known position: basis spans the attitude and velocity
/// tangents, sigma_yaw0 on yaw, sigma_tilt0 on roll/pitch, sigma_v0 on
/// velocity. When sigma_p0 > 0 the position tangents join the basis.
DegeneratePrior ins_prior(const InsConfig& cfg, const GroupElement& mean);

struct MeasurementPrediction {
  Eigen::VectorXd predicted;
  Eigen::MatrixXd jacobian;  // d h(x exp(xi)) / d xi at xi = 0
};

/// Position measurement h(x) = position. H = [R | 0] on SE2 and
/// [0 | 0 | R] on SE23.
MeasurementPrediction gps_measurement(GroupId group, const GroupElement& est);

}  // namespace invsmooth::models
