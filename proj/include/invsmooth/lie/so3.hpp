// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// SO(3) kernel. Rotations are 3x3 matrices, tangents are rotation vectors.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "invsmooth/errors.hpp"

namespace invsmooth {

namespace detail {

/// Below this angle the trigonometric coefficients switch to Taylor series.
/// Both branches are accurate to a few ulps at the switch point.
inline constexpr double kSmallAngle = 1e-3;

/// Distance to pi under which log() refuses to answer.
inline constexpr double kCutLocusMargin = 1e-7;

/// sin(t) / t
template <typename Scalar>
Scalar sinc(Scalar t) {
  using std::sin;
  if (std::abs(t) < Scalar(kSmallAngle)) {
    const Scalar t2 = t * t;
    return Scalar(1) - t2 / Scalar(6) + t2 * t2 / Scalar(120);
  }
  return sin(t) / t;
}

/// (1 - cos(t)) / t^2, written through the half angle to avoid cancellation.
template <typename Scalar>
Scalar cosc(Scalar t) {
  const Scalar s = sinc(t / Scalar(2));
  return s * s / Scalar(2);
}

/// (t - sin(t)) / t^3
template <typename Scalar>
Scalar sinc3(Scalar t) {
  using std::sin;
  if (std::abs(t) < Scalar(kSmallAngle)) {
    const Scalar t2 = t * t;
    return Scalar(1) / Scalar(6) - t2 / Scalar(120) + t2 * t2 / Scalar(5040);
  }
  return (t - sin(t)) / (t * t * t);
}

/// (1 - (t/2) cot(t/2)) / t^2
template <typename Scalar>
Scalar cotc(Scalar t) {
  using std::tan;
  if (std::abs(t) < Scalar(kSmallAngle)) {
    const Scalar t2 = t * t;
    return Scalar(1) / Scalar(12) + t2 / Scalar(720) + t2 * t2 / Scalar(30240);
  }
  const Scalar h = t / Scalar(2);
  return (Scalar(1) - h / tan(h)) / (t * t);
}

}  // namespace detail

namespace so3 {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, 3, 3>;

/// Skew-symmetric matrix such that hat(w) * u = w x u.
template <typename Derived>
Matrix<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> W;
  // clang-format off
  W << Scalar(0), -w(2),      w(1),
       w(2),      Scalar(0), -w(0),
      -w(1),      w(0),       Scalar(0);
  // clang-format on
  return W;
}

template <typename Derived>
Vector<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& W) {
  return Vector<typename Derived::Scalar>(W(2, 1), W(0, 2), W(1, 0));
}

template <typename Derived>
Matrix<typename Derived::Scalar> exp(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const Scalar t = w.norm();
  const Matrix<Scalar> W = hat(w);
  return Matrix<Scalar>::Identity() + detail::sinc(t) * W + detail::cosc(t) * W * W;
}

/// Rotation vector of R. Throws AngleAtCut when the angle is within 1e-7 of pi.
template <typename Derived>
Vector<typename Derived::Scalar> log(const Eigen::MatrixBase<Derived>& R) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  using std::sqrt;
  const Scalar c = std::clamp((R.trace() - Scalar(1)) / Scalar(2), Scalar(-1), Scalar(1));
  const Vector<Scalar> w = vee(R - R.transpose()) / Scalar(2);
  const Scalar s = w.norm();
  const Scalar t = atan2(s, c);
  if (Scalar(std::numbers::pi) - t < Scalar(detail::kCutLocusMargin)) {
    throw AngleAtCut("so3::log: rotation angle at the cut locus");
  }
  if (t < Scalar(detail::kSmallAngle)) {
    const Scalar t2 = t * t;
    return w * (Scalar(1) + t2 / Scalar(6) + Scalar(7) * t2 * t2 / Scalar(360));
  }
  if (c > Scalar(-0.9)) {
    return w * (t / s);
  }
  // Near pi the antisymmetric part is small; recover the axis from the
  // symmetric part B = (1 - cos t) a a^T instead.
  const Matrix<Scalar> B =
      (R + R.transpose()) / Scalar(2) - c * Matrix<Scalar>::Identity();
  const Scalar one_minus_c = Scalar(1) - c;
  Eigen::Index k = 0;
  B.diagonal().maxCoeff(&k);
  const Scalar ak = sqrt(std::max(B(k, k) / one_minus_c, Scalar(0)));
  Vector<Scalar> axis = B.col(k) / (one_minus_c * ak);
  axis.normalize();
  if (axis.dot(w) < Scalar(0)) axis = -axis;
  return t * axis;
}

/// Left Jacobian: exp(w + d) ~ exp(J_l(w) d) exp(w).
template <typename Derived>
Matrix<typename Derived::Scalar> left_jacobian(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const Scalar t = w.norm();
  const Matrix<Scalar> W = hat(w);
  return Matrix<Scalar>::Identity() + detail::cosc(t) * W + detail::sinc3(t) * W * W;
}

template <typename Derived>
Matrix<typename Derived::Scalar> left_jacobian_inverse(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const Scalar t = w.norm();
  const Matrix<Scalar> W = hat(w);
  return Matrix<Scalar>::Identity() - W / Scalar(2) + detail::cotc(t) * W * W;
}

/// Right Jacobian: exp(w + d) ~ exp(w) exp(J_r(w) d).
template <typename Derived>
Matrix<typename Derived::Scalar> right_jacobian(const Eigen::MatrixBase<Derived>& w) {
  return left_jacobian(-w.eval());
}

template <typename Derived>
Matrix<typename Derived::Scalar> right_jacobian_inverse(const Eigen::MatrixBase<Derived>& w) {
  return left_jacobian_inverse(-w.eval());
}

/// Yaw of a rotation under the z-y-x convention.
template <typename Derived>
typename Derived::Scalar yaw(const Eigen::MatrixBase<Derived>& R) {
  using std::atan2;
  return atan2(R(1, 0), R(0, 0));
}

template <typename Scalar>
Matrix<Scalar> rot_z(Scalar angle) {
  return exp(Vector<Scalar>(Scalar(0), Scalar(0), angle));
}

}  // namespace so3
}  // namespace invsmooth
