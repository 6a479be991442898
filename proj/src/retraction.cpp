// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "invsmooth/smoother/retraction.hpp"

#include <Eigen/LU>

#include "invsmooth/errors.hpp"
#include "invsmooth/lie/se2.hpp"
#include "invsmooth/lie/so3.hpp"

namespace invsmooth {

namespace {

bool has_linear_variant(GroupId g) { return g == GroupId::SE2 || g == GroupId::SE23; }

}  // namespace

std::string_view to_string(RetractionKind kind) {
  switch (kind) {
    case RetractionKind::Invariant: return "invariant";
    case RetractionKind::ForsterSplit: return "forster";
    case RetractionKind::GtsamLinear: return "gtsam";
  }
  return "?";
}

std::optional<RetractionKind> parse_retraction(std::string_view name) {
  if (name == "invariant") return RetractionKind::Invariant;
  if (name == "forster") return RetractionKind::ForsterSplit;
  if (name == "gtsam") return RetractionKind::GtsamLinear;
  return std::nullopt;
}

GroupElement apply_retraction(RetractionKind kind, const GroupElement& x,
                              const Eigen::Ref<const Eigen::VectorXd>& xi) {
  const GroupId g = x.group();
  if (xi.size() != tangent_dim(g)) throw InvalidArgument("apply_retraction: wrong increment size");
  if (kind == RetractionKind::Invariant || !has_linear_variant(g)) return x * exp(g, xi);

  MatN m = x.matrix();
  if (g == GroupId::SE2) {
    const Eigen::Matrix2d R = m.topLeftCorner(2, 2);
    m.topLeftCorner(2, 2) = R * so2::exp(xi(2));
    m.block(0, 2, 2, 1) += R * xi.head<2>();
    return GroupElement::unchecked(g, m);
  }
  const Eigen::Matrix3d R = m.topLeftCorner(3, 3);
  m.topLeftCorner(3, 3) = R * so3::exp(Eigen::Vector3d(xi.segment<3>(0)));
  if (kind == RetractionKind::GtsamLinear) {
    m.block(0, 3, 3, 1) += R * xi.segment<3>(3);
  } else {
    m.block(0, 3, 3, 1) += xi.segment<3>(3);
  }
  m.block(0, 4, 3, 1) += R * xi.segment<3>(6);
  return GroupElement::unchecked(g, m);
}

VecQ local_coordinates(RetractionKind kind, const GroupElement& base, const GroupElement& x) {
  const GroupId g = x.group();
  if (base.group() != g) throw GroupMismatch("local_coordinates: mixed groups");
  if (kind == RetractionKind::Invariant || !has_linear_variant(g)) return log(base.inverse() * x);

  const MatN& b = base.matrix();
  const MatN& m = x.matrix();
  if (g == GroupId::SE2) {
    const Eigen::Matrix2d Rb = b.topLeftCorner(2, 2);
    VecQ out(3);
    out.head<2>() = Rb.transpose() * (m.block(0, 2, 2, 1) - b.block(0, 2, 2, 1));
    out(2) = so2::log(Eigen::Matrix2d(Rb.transpose() * m.topLeftCorner(2, 2)));
    return out;
  }
  const Eigen::Matrix3d Rb = b.topLeftCorner(3, 3);
  VecQ out(9);
  out.segment<3>(0) = so3::log(Eigen::Matrix3d(Rb.transpose() * m.topLeftCorner(3, 3)));
  const Eigen::Vector3d dv = m.block(0, 3, 3, 1) - b.block(0, 3, 3, 1);
  out.segment<3>(3) = kind == RetractionKind::GtsamLinear ? Eigen::Vector3d(Rb.transpose() * dv) : dv;
  out.segment<3>(6) = Rb.transpose() * (m.block(0, 4, 3, 1) - b.block(0, 4, 3, 1));
  return out;
}

MatQ local_coordinates_jacobian(RetractionKind kind, const GroupElement& base, const GroupElement& x) {
  const GroupId g = x.group();
  if (kind == RetractionKind::Invariant || !has_linear_variant(g)) {
    return right_jacobian(TangentVector(g, log(base.inverse() * x)));
  }
  const int q = tangent_dim(g);
  MatQ J = MatQ::Zero(q, q);
  if (g == GroupId::SE2) {
    J.topLeftCorner(2, 2) = base.rotation().transpose() * x.rotation();
    J(2, 2) = 1.0;
    return J;
  }
  const Eigen::Matrix3d Rb = base.rotation();
  const Eigen::Matrix3d R = x.rotation();
  const Eigen::Matrix3d dR = Rb.transpose() * R;
  J.block(0, 0, 3, 3) = so3::right_jacobian_inverse(so3::log(dR));
  J.block(3, 3, 3, 3) = kind == RetractionKind::GtsamLinear ? dR : Eigen::Matrix3d::Identity();
  J.block(6, 6, 3, 3) = dR;
  return J;
}

MatQ tangent_map(RetractionKind kind, const GroupElement& x) {
  const int q = tangent_dim(x.group());
  MatQ T = MatQ::Identity(q, q);
  if (kind == RetractionKind::ForsterSplit && x.group() == GroupId::SE23) {
    T.block(3, 3, 3, 3) = x.rotation().transpose();
  }
  return T;
}

MatQ retraction_jacobian(RetractionKind kind, const GroupAffineStep& s, const GroupElement& est_i,
                         const GroupElement& est_i1) {
  if (kind == RetractionKind::Invariant) return log_linear_matrix(s);
  const GroupElement estimated_upsilon = apply(s.phi, est_i).inverse() * s.gamma.inverse() * est_i1;
  const MatQ F_hat = adjoint(estimated_upsilon.inverse()) * automorphism_matrix(s.group(), s.phi);
  if (kind == RetractionKind::GtsamLinear) return F_hat;
  const MatQ T_next = tangent_map(kind, est_i1);
  return T_next.inverse() * F_hat * tangent_map(kind, est_i);
}

}  // namespace invsmooth
