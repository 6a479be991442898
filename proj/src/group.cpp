// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/lie/group.hpp"

#include <Eigen/LU>
#include <string>

#include "invsmooth/errors.hpp"
#include "invsmooth/lie/se2.hpp"
#include "invsmooth/lie/se23.hpp"
#include "invsmooth/lie/series.hpp"
#include "invsmooth/lie/so3.hpp"

namespace invsmooth {

namespace {

constexpr double kMembershipTol = 1e-9;

int rotation_dim(GroupId g) { return (g == GroupId::SO2 || g == GroupId::SE2) ? 2 : 3; }

void require_tangent(GroupId g, Eigen::Index size) {
  if (size != tangent_dim(g)) {
    throw InvalidArgument("tangent vector of length " + std::to_string(size) + " for group " +
                          std::string(to_string(g)));
  }
}

}  // namespace

std::string_view to_string(GroupId g) {
  switch (g) {
    case GroupId::SO2: return "SO2";
    case GroupId::SE2: return "SE2";
    case GroupId::SO3: return "SO3";
    case GroupId::SE23: return "SE23";
  }
  return "?";
}

GroupElement GroupElement::from_matrix(GroupId group, const Eigen::Ref<const Eigen::MatrixXd>& mat) {
  const int n = matrix_dim(group);
  if (mat.rows() != n || mat.cols() != n) {
    throw InvalidArgument("matrix has wrong size for group " + std::string(to_string(group)));
  }
  const int r = rotation_dim(group);
  const Eigen::MatrixXd R = mat.topLeftCorner(r, r);
  if ((R.transpose() * R - Eigen::MatrixXd::Identity(r, r)).norm() > kMembershipTol ||
      std::abs(R.determinant() - 1.0) > kMembershipTol) {
    throw InvalidArgument("rotation block is not in SO(" + std::to_string(r) + ")");
  }
  if (n > r) {
    const Eigen::MatrixXd bottom = mat.bottomRows(n - r);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n - r, n);
    expected.rightCols(n - r).setIdentity();
    if (bottom != expected) {
      throw InvalidArgument("fixed bottom rows violated for group " + std::string(to_string(group)));
    }
  }
  return GroupElement(group, MatN(mat));
}

GroupElement GroupElement::identity(GroupId group) {
  const int n = matrix_dim(group);
  return GroupElement(group, MatN::Identity(n, n));
}

MatR GroupElement::rotation() const {
  const int r = rotation_dim(group_);
  return mat_.topLeftCorner(r, r);
}

VecR GroupElement::position() const {
  switch (group_) {
    case GroupId::SE2: return mat_.block(0, 2, 2, 1);
    case GroupId::SE23: return mat_.block(0, 4, 3, 1);
    default: throw InvalidArgument("position() needs SE2 or SE23");
  }
}

Eigen::Vector3d GroupElement::velocity() const {
  if (group_ != GroupId::SE23) throw InvalidArgument("velocity() needs SE23");
  return mat_.block<3, 1>(0, 3);
}

GroupElement GroupElement::inverse() const {
  switch (group_) {
    case GroupId::SO2:
    case GroupId::SO3: return GroupElement(group_, mat_.transpose());
    case GroupId::SE2: return GroupElement(group_, se2::inverse(Eigen::Matrix3d(mat_)));
    case GroupId::SE23: return GroupElement(group_, se23::inverse(se23::Matrix<double>(mat_)));
  }
  return *this;
}

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
  if (rhs.group_ != group_) throw GroupMismatch("composing elements of different groups");
  return GroupElement(group_, mat_ * rhs.mat_);
}

double GroupElement::distance(const GroupElement& other) const {
  if (other.group_ != group_) throw GroupMismatch("distance between different groups");
  return (mat_ - other.mat_).norm();
}

TangentVector::TangentVector(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v) : group(g), coeffs(v) {
  require_tangent(g, v.size());
}

GroupElement make_so2(double theta) { return GroupElement::unchecked(GroupId::SO2, so2::exp(theta)); }

GroupElement make_so3(const Eigen::Matrix3d& R) { return GroupElement::from_matrix(GroupId::SO3, R); }

GroupElement make_se2(double theta, const Eigen::Vector2d& x) {
  Eigen::Matrix3d X = Eigen::Matrix3d::Identity();
  X.topLeftCorner<2, 2>() = so2::exp(theta);
  X.topRightCorner<2, 1>() = x;
  return GroupElement::unchecked(GroupId::SE2, X);
}

GroupElement make_se23(const Eigen::Matrix3d& R, const Eigen::Vector3d& v, const Eigen::Vector3d& x) {
  return GroupElement::from_matrix(GroupId::SE23, se23::make<double>(R, v, x));
}

GroupElement exp(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v) {
  require_tangent(g, v.size());
  switch (g) {
    case GroupId::SO2: return GroupElement::unchecked(g, so2::exp(v(0)));
    case GroupId::SE2: return GroupElement::unchecked(g, se2::exp(Eigen::Vector3d(v)));
    case GroupId::SO3: return GroupElement::unchecked(g, so3::exp(Eigen::Vector3d(v)));
    case GroupId::SE23: return GroupElement::unchecked(g, se23::exp(se23::Tangent<double>(v)));
  }
  return GroupElement::identity(g);
}

GroupElement exp(const TangentVector& v) { return exp(v.group, v.coeffs); }

VecQ log(const GroupElement& x) {
  const MatN& m = x.matrix();
  switch (x.group()) {
    case GroupId::SO2: return VecQ::Constant(1, so2::log(Eigen::Matrix2d(m)));
    case GroupId::SE2: return se2::log(Eigen::Matrix3d(m));
    case GroupId::SO3: return so3::log(Eigen::Matrix3d(m));
    case GroupId::SE23: return se23::log(se23::Matrix<double>(m));
  }
  return {};
}

MatN hat(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v) {
  require_tangent(g, v.size());
  switch (g) {
    case GroupId::SO2: {
      Eigen::Matrix2d X;
      X << 0.0, -v(0), v(0), 0.0;
      return X;
    }
    case GroupId::SE2: return se2::hat(Eigen::Vector3d(v));
    case GroupId::SO3: return so3::hat(Eigen::Vector3d(v));
    case GroupId::SE23: return se23::hat(se23::Tangent<double>(v));
  }
  return {};
}

MatQ adjoint(const GroupElement& x) {
  const MatN& m = x.matrix();
  switch (x.group()) {
    case GroupId::SO2: return MatQ::Identity(1, 1);
    case GroupId::SE2: return se2::adjoint(Eigen::Matrix3d(m));
    case GroupId::SO3: return m;
    case GroupId::SE23: return se23::adjoint(se23::Matrix<double>(m));
  }
  return {};
}

MatQ ad(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v) {
  require_tangent(g, v.size());
  switch (g) {
    case GroupId::SO2: return MatQ::Zero(1, 1);
    case GroupId::SE2: return se2::ad(Eigen::Vector3d(v));
    case GroupId::SO3: return so3::hat(Eigen::Vector3d(v));
    case GroupId::SE23: return se23::ad(se23::Tangent<double>(v));
  }
  return {};
}

VecQ bracket(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  require_tangent(g, b.size());
  return ad(g, a) * b;
}

MatQ right_jacobian_inverse(const TangentVector& v) {
  switch (v.group) {
    case GroupId::SO2: return MatQ::Identity(1, 1);
    case GroupId::SO3: return so3::right_jacobian(Eigen::Vector3d(v.coeffs));
    case GroupId::SE2: return right_jacobian_series(se2::ad(Eigen::Vector3d(v.coeffs)));
    case GroupId::SE23: return right_jacobian_series(se23::ad(se23::Tangent<double>(v.coeffs)));
  }
  return {};
}

MatQ right_jacobian(const TangentVector& v) {
  switch (v.group) {
    case GroupId::SO2: return MatQ::Identity(1, 1);
    case GroupId::SO3: return so3::right_jacobian_inverse(Eigen::Vector3d(v.coeffs));
    case GroupId::SE2: {
      const Eigen::Matrix3d Jr = right_jacobian_inverse(v);
      return Jr.inverse();
    }
    case GroupId::SE23: {
      // Block lower-triangular with equal diagonal blocks: invert by hand.
      const se23::TangentMap<double> Jr = right_jacobian_inverse(v);
      const Eigen::Matrix3d Di = so3::right_jacobian_inverse(Eigen::Vector3d(v.coeffs.head<3>()));
      se23::TangentMap<double> out = se23::TangentMap<double>::Zero();
      for (int b = 0; b < 3; ++b) out.block<3, 3>(3 * b, 3 * b) = Di;
      out.block<3, 3>(3, 0) = -Di * Jr.block<3, 3>(3, 0) * Di;
      out.block<3, 3>(6, 0) = -Di * Jr.block<3, 3>(6, 0) * Di;
      return out;
    }
  }
  return {};
}

void check_supported(GroupId g, const Automorphism& phi) {
  switch (phi.kind) {
    case Automorphism::Kind::Identity: return;
    case Automorphism::Kind::Conjugation:
      if (!phi.conjugator || phi.conjugator->group() != g) {
        throw UnsupportedAutomorphism("conjugation needs a conjugator from group " +
                                      std::string(to_string(g)));
      }
      return;
    case Automorphism::Kind::PositionShift:
      if (g != GroupId::SE23) {
        throw UnsupportedAutomorphism("position shift is only defined on SE23");
      }
      return;
  }
}

GroupElement apply(const Automorphism& phi, const GroupElement& x) {
  check_supported(x.group(), phi);
  switch (phi.kind) {
    case Automorphism::Kind::Identity: return x;
    case Automorphism::Kind::Conjugation: return *phi.conjugator * x * phi.conjugator->inverse();
    case Automorphism::Kind::PositionShift: {
      MatN m = x.matrix();
      m.block(0, 4, 3, 1) += phi.dt * m.block(0, 3, 3, 1);
      return GroupElement::unchecked(x.group(), m);
    }
  }
  return x;
}

MatQ automorphism_matrix(GroupId g, const Automorphism& phi) {
  check_supported(g, phi);
  const int q = tangent_dim(g);
  switch (phi.kind) {
    case Automorphism::Kind::Identity: return MatQ::Identity(q, q);
    case Automorphism::Kind::Conjugation: return adjoint(*phi.conjugator);
    case Automorphism::Kind::PositionShift: {
      MatQ M = MatQ::Identity(q, q);
      M.block(6, 3, 3, 3) = phi.dt * Eigen::Matrix3d::Identity();
      return M;
    }
  }
  return MatQ::Identity(q, q);
}

std::optional<Automorphism> compose(const Automorphism& outer, const Automorphism& inner) {
  using Kind = Automorphism::Kind;
  if (inner.kind == Kind::Identity) return outer;
  if (outer.kind == Kind::Identity) return inner;
  if (outer.kind == Kind::PositionShift && inner.kind == Kind::PositionShift) {
    return Automorphism::position_shift(outer.dt + inner.dt);
  }
  if (outer.kind == Kind::Conjugation && inner.kind == Kind::Conjugation) {
    return Automorphism::conjugation(*outer.conjugator * *inner.conjugator);
  }
  return std::nullopt;
}

}  // namespace invsmooth
