// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// SE_2(3) kernel (extended poses).
//
// Matrix form                 tangent ordering (phi, nu, rho)
//   [ R  v  x ]
//   [ 0  1  0 ]                 hat = [ phi^  nu  rho ]
//   [ 0  0  1 ]                       [ 0     0   0   ]
//                                     [ 0     0   0   ]

#pragma once

#include <Eigen/Core>

#include "invsmooth/lie/so3.hpp"

namespace invsmooth::se23 {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, 5, 5>;
template <typename Scalar>
using Tangent = Eigen::Matrix<Scalar, 9, 1>;
template <typename Scalar>
using TangentMap = Eigen::Matrix<Scalar, 9, 9>;

template <typename Scalar>
Matrix<Scalar> make(const so3::Matrix<Scalar>& R, const so3::Vector<Scalar>& v,
                    const so3::Vector<Scalar>& x) {
  Matrix<Scalar> T = Matrix<Scalar>::Identity();
  T.template topLeftCorner<3, 3>() = R;
  T.template block<3, 1>(0, 3) = v;
  T.template block<3, 1>(0, 4) = x;
  return T;
}

template <typename Derived>
Matrix<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> X = Matrix<Scalar>::Zero();
  X.template topLeftCorner<3, 3>() = so3::hat(xi.template segment<3>(0));
  X.template block<3, 1>(0, 3) = xi.template segment<3>(3);
  X.template block<3, 1>(0, 4) = xi.template segment<3>(6);
  return X;
}

template <typename Derived>
Matrix<typename Derived::Scalar> exp(const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  const so3::Vector<Scalar> phi = xi.template segment<3>(0);
  const so3::Matrix<Scalar> Jl = so3::left_jacobian(phi);
  return make<Scalar>(so3::exp(phi), Jl * xi.template segment<3>(3),
                      Jl * xi.template segment<3>(6));
}

template <typename Derived>
Tangent<typename Derived::Scalar> log(const Eigen::MatrixBase<Derived>& T) {
  using Scalar = typename Derived::Scalar;
  const so3::Vector<Scalar> phi = so3::log(T.template topLeftCorner<3, 3>().eval());
  const so3::Matrix<Scalar> Jli = so3::left_jacobian_inverse(phi);
  Tangent<Scalar> xi;
  xi << phi, Jli * T.template block<3, 1>(0, 3), Jli * T.template block<3, 1>(0, 4);
  return xi;
}

template <typename Derived>
Matrix<typename Derived::Scalar> inverse(const Eigen::MatrixBase<Derived>& T) {
  using Scalar = typename Derived::Scalar;
  const so3::Matrix<Scalar> Rt = T.template topLeftCorner<3, 3>().transpose();
  return make<Scalar>(Rt, -Rt * T.template block<3, 1>(0, 3), -Rt * T.template block<3, 1>(0, 4));
}

/// Ad_T such that T exp(xi) T^-1 = exp(Ad_T xi):
///   [ R     0  0 ]
///   [ v^ R  R  0 ]
///   [ x^ R  0  R ]
template <typename Derived>
TangentMap<typename Derived::Scalar> adjoint(const Eigen::MatrixBase<Derived>& T) {
  using Scalar = typename Derived::Scalar;
  const so3::Matrix<Scalar> R = T.template topLeftCorner<3, 3>();
  TangentMap<Scalar> A = TangentMap<Scalar>::Zero();
  A.template block<3, 3>(0, 0) = R;
  A.template block<3, 3>(3, 3) = R;
  A.template block<3, 3>(6, 6) = R;
  A.template block<3, 3>(3, 0) = so3::hat(T.template block<3, 1>(0, 3)) * R;
  A.template block<3, 3>(6, 0) = so3::hat(T.template block<3, 1>(0, 4)) * R;
  return A;
}

template <typename Derived>
TangentMap<typename Derived::Scalar> ad(const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  const so3::Matrix<Scalar> P = so3::hat(xi.template segment<3>(0));
  TangentMap<Scalar> A = TangentMap<Scalar>::Zero();
  A.template block<3, 3>(0, 0) = P;
  A.template block<3, 3>(3, 3) = P;
  A.template block<3, 3>(6, 6) = P;
  A.template block<3, 3>(3, 0) = so3::hat(xi.template segment<3>(3));
  A.template block<3, 3>(6, 0) = so3::hat(xi.template segment<3>(6));
  return A;
}

}  // namespace invsmooth::se23
