// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <limits>

namespace invsmooth {

/// Standard right Jacobian from the adjoint-representation matrix ad(v):
///
///   J_r(v) = sum_k (-ad(v))^k / (k + 1)!
///
/// The series is entire. For the groups used here ad(v) has spectrum
/// {0, +-i|phi|}, so the terms decay like |phi|^k / k! and 60 terms cover
/// every angle inside the injectivity radius.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime,
              0, Derived::MaxRowsAtCompileTime, Derived::MaxColsAtCompileTime>
right_jacobian_series(const Eigen::MatrixBase<Derived>& ad) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime, 0,
                            Derived::MaxRowsAtCompileTime, Derived::MaxColsAtCompileTime>;
  const Eigen::Index n = ad.rows();
  const Mat X = -ad;
  Mat term = Mat::Identity(n, n);
  Mat sum = term;
  for (int k = 1; k < 60; ++k) {
    term = (term * X / Scalar(k + 1)).eval();
    sum += term;
    if (term.template lpNorm<Eigen::Infinity>() <=
        std::numeric_limits<Scalar>::epsilon() * Scalar(1e-2) * sum.template lpNorm<Eigen::Infinity>()) {
      break;
    }
  }
  return sum;
}

}  // namespace invsmooth
