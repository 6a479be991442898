// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// SO(2) and SE(2) kernels.
//
// SE(2) matrix form      tangent ordering (nu1, nu2, theta)
//   [ R(theta)  x ]        hat = [ theta*J  nu ]
//   [ 0  0      1 ]              [ 0   0    0  ]      J = [0 -1; 1 0]

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "invsmooth/errors.hpp"
#include "invsmooth/lie/so3.hpp"

namespace invsmooth {

namespace so2 {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
Matrix<Scalar> exp(Scalar theta) {
  using std::cos;
  using std::sin;
  Matrix<Scalar> R;
  R << cos(theta), -sin(theta), sin(theta), cos(theta);
  return R;
}

template <typename Derived>
typename Derived::Scalar log(const Eigen::MatrixBase<Derived>& R) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  const Scalar theta = atan2(R(1, 0), R(0, 0));
  if (Scalar(std::numbers::pi) - std::abs(theta) < Scalar(detail::kCutLocusMargin)) {
    throw AngleAtCut("so2::log: rotation angle at the cut locus");
  }
  return theta;
}

}  // namespace so2

namespace se2 {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Tangent = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using TangentMap = Eigen::Matrix<Scalar, 3, 3>;

template <typename Derived>
Matrix<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> X = Matrix<Scalar>::Zero();
  X(0, 1) = -v(2);
  X(1, 0) = v(2);
  X(0, 2) = v(0);
  X(1, 2) = v(1);
  return X;
}

template <typename Derived>
Matrix<typename Derived::Scalar> exp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar t = v(2);
  const Scalar a = detail::sinc(t);
  const Scalar b = t * detail::cosc(t);
  Matrix<Scalar> X = Matrix<Scalar>::Identity();
  X.template topLeftCorner<2, 2>() = so2::exp(t);
  X(0, 2) = a * v(0) - b * v(1);
  X(1, 2) = b * v(0) + a * v(1);
  return X;
}

template <typename Derived>
Tangent<typename Derived::Scalar> log(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  using std::tan;
  const Scalar t = so2::log(X.template topLeftCorner<2, 2>().eval());
  const Scalar h = t / Scalar(2);
  // (t/2) cot(t/2)
  const Scalar a = std::abs(t) < Scalar(detail::kSmallAngle)
                       ? Scalar(1) - t * t / Scalar(12) - t * t * t * t / Scalar(720)
                       : h / tan(h);
  const Scalar x = X(0, 2);
  const Scalar y = X(1, 2);
  return Tangent<Scalar>(a * x + h * y, -h * x + a * y, t);
}

template <typename Derived>
Matrix<typename Derived::Scalar> inverse(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> Y = Matrix<Scalar>::Identity();
  Y.template topLeftCorner<2, 2>() = X.template topLeftCorner<2, 2>().transpose();
  Y.template topRightCorner<2, 1>() =
      -Y.template topLeftCorner<2, 2>() * X.template topRightCorner<2, 1>();
  return Y;
}

/// Ad_X such that X exp(v) X^-1 = exp(Ad_X v).
template <typename Derived>
TangentMap<typename Derived::Scalar> adjoint(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  TangentMap<Scalar> A = TangentMap<Scalar>::Identity();
  A.template topLeftCorner<2, 2>() = X.template topLeftCorner<2, 2>();
  A(0, 2) = X(1, 2);
  A(1, 2) = -X(0, 2);
  return A;
}

/// ad(v) w = [v, w].
template <typename Derived>
TangentMap<typename Derived::Scalar> ad(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  TangentMap<Scalar> A = TangentMap<Scalar>::Zero();
  A(0, 1) = -v(2);
  A(1, 0) = v(2);
  A(0, 2) = v(1);
  A(1, 2) = -v(0);
  return A;
}

}  // namespace se2
}  // namespace invsmooth
