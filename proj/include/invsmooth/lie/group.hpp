// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Runtime-dispatched matrix Lie group facade over the fixed-size kernels in
// so3.hpp, se2.hpp and se23.hpp. Storage is dynamic-sized with fixed upper
// bounds, so nothing here touches the heap.

#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>

namespace invsmooth {

enum class GroupId { SO2, SE2, SO3, SE23 };

/// Tangent dimension q.
constexpr int tangent_dim(GroupId g) {
  switch (g) {
    case GroupId::SO2: return 1;
    case GroupId::SE2: return 3;
    case GroupId::SO3: return 3;
    case GroupId::SE23: return 9;
  }
  return 0;
}

/// Side length n of the square matrix representation.
constexpr int matrix_dim(GroupId g) {
  switch (g) {
    case GroupId::SO2: return 2;
    case GroupId::SE2: return 3;
    case GroupId::SO3: return 3;
    case GroupId::SE23: return 5;
  }
  return 0;
}

std::string_view to_string(GroupId g);

using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 5, 5>;
using VecQ = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;
using MatQ = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using VecR = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

/// A member of one of the supported groups, stored as its homogeneous matrix.
class GroupElement {
 public:
  /// Validates the matrix: orthonormal rotation block with det +1 (1e-9) and
  /// exact fixed rows. Throws InvalidArgument otherwise.
  static GroupElement from_matrix(GroupId group, const Eigen::Ref<const Eigen::MatrixXd>& mat);
  static GroupElement identity(GroupId group);

  GroupId group() const { return group_; }
  const MatN& matrix() const { return mat_; }

  /// Rotation block (2x2 or 3x3).
  MatR rotation() const;
  /// Position column for SE2 / SE23; throws for pure rotation groups.
  VecR position() const;
  /// Velocity column for SE23 only.
  Eigen::Vector3d velocity() const;

  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& rhs) const;

  /// Matrix-norm distance to another element of the same group.
  double distance(const GroupElement& other) const;

  /// Builds without checking invariants; for kernels whose output is
  /// known to be on the group.
  static GroupElement unchecked(GroupId group, MatN mat) { return GroupElement(group, std::move(mat)); }

 private:
  GroupElement(GroupId group, MatN mat) : group_(group), mat_(std::move(mat)) {}

  GroupId group_;
  MatN mat_;
};

struct TangentVector {
  TangentVector(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v);

  GroupId group;
  VecQ coeffs;
};

GroupElement make_so2(double theta);
GroupElement make_so3(const Eigen::Matrix3d& R);
GroupElement make_se2(double theta, const Eigen::Vector2d& x);
GroupElement make_se23(const Eigen::Matrix3d& R, const Eigen::Vector3d& v, const Eigen::Vector3d& x);

GroupElement exp(const TangentVector& v);
GroupElement exp(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Inverse of exp inside the injectivity radius. Throws AngleAtCut when
/// the rotation angle is within 1e-7 of pi.
VecQ log(const GroupElement& g);

/// Lie algebra matrix of a tangent vector.
MatN hat(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Ad_g with g exp(v) g^-1 = exp(Ad_g v).
MatQ adjoint(const GroupElement& g);

/// ad(v) w = [v, w].
MatQ ad(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& v);
VecQ bracket(GroupId g, const Eigen::Ref<const Eigen::VectorXd>& a,
             const Eigen::Ref<const Eigen::VectorXd>& b);

/// Derivative of the Baker-Campbell-Hausdorff product in its right argument:
///
///   log(exp(v) exp(d)) = v + J d + O(|d|^2).
///
/// This is the Jacobian that links a left-invariant increment to the change
/// of log-coordinates, i.e. the inverse of the "exp(v + d) = exp(v) exp(J_r d)"
/// right Jacobian of some texts. Requires the attitude part of v below pi.
MatQ right_jacobian(const TangentVector& v);

/// Inverse of right_jacobian(v): exp(v + d) = exp(v) exp(M d) + O(|d|^2).
MatQ right_jacobian_inverse(const TangentVector& v);

/// Group automorphisms used by group-affine dynamics.
struct Automorphism {
  enum class Kind { Identity, Conjugation, PositionShift };

  static Automorphism identity() { return {Kind::Identity, std::nullopt, 0.0}; }
  /// x -> g x g^-1
  static Automorphism conjugation(const GroupElement& g) { return {Kind::Conjugation, g, 0.0}; }
  /// SE23 only: (R, v, x) -> (R, v, x + dt v)
  static Automorphism position_shift(double dt) { return {Kind::PositionShift, std::nullopt, dt}; }

  Kind kind = Kind::Identity;
  std::optional<GroupElement> conjugator;
  double dt = 0.0;
};

/// Throws UnsupportedAutomorphism for invalid (group, automorphism) pairs.
void check_supported(GroupId g, const Automorphism& phi);

GroupElement apply(const Automorphism& phi, const GroupElement& x);

/// Matrix M with phi(x exp(v)) = phi(x) exp(M v).
MatQ automorphism_matrix(GroupId g, const Automorphism& phi);

/// outer o inner when the result stays inside the supported family.
std::optional<Automorphism> compose(const Automorphism& outer, const Automorphism& inner);

}  // namespace invsmooth
