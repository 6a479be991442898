// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// State-update strategies compared by the smoother.
//
//   Invariant     x <- x exp(xi)
//   GtsamLinear   (R, v, x) <- (R exp(phi), v + R nu, x + R rho)
//   ForsterSplit  (R, v, x) <- (R exp(phi), v + nu,   x + R rho)
//
// On SE(2) both linear variants reduce to (R, x) <- (R R(theta), x + R nu).
// On SO(2)/SO(3) every kind is the group exponential.

#pragma once

#include <optional>
#include <string_view>

#include "invsmooth/dynamics.hpp"
#include "invsmooth/lie/group.hpp"

namespace invsmooth {

enum class RetractionKind { Invariant, ForsterSplit, GtsamLinear };

std::string_view to_string(RetractionKind kind);
/// Accepts "invariant", "forster", "gtsam".
std::optional<RetractionKind> parse_retraction(std::string_view name);

GroupElement apply_retraction(RetractionKind kind, const GroupElement& x,
                              const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Inverse of apply_retraction around `base`: apply_retraction(kind, base,
/// local_coordinates(kind, base, x)) == x.
VecQ local_coordinates(RetractionKind kind, const GroupElement& base, const GroupElement& x);

/// d local_coordinates(kind, base, apply_retraction(kind, x, xi)) / d xi at 0.
MatQ local_coordinates_jacobian(RetractionKind kind, const GroupElement& base, const GroupElement& x);

/// T(x) with x exp(T xi) = apply_retraction(kind, x, xi) + O(|xi|^2).
MatQ tangent_map(RetractionKind kind, const GroupElement& x);

/// Transition Jacobian F used in the row xi_{i+1} - F xi_i of the linearised
/// dynamics, expressed in the coordinates of `kind`:
///
///   Invariant     Ad_{Upsilon^-1} M                 (estimate independent)
///   GtsamLinear   Ad_{Uhat^-1} M, Uhat = Phi(x_i)^-1 Gamma^-1 x_{i+1}
///   ForsterSplit  T(x_{i+1})^-1 (Ad_{Uhat^-1} M) T(x_i)
MatQ retraction_jacobian(RetractionKind kind, const GroupAffineStep& s, const GroupElement& est_i,
                         const GroupElement& est_i1);

}  // namespace invsmooth
