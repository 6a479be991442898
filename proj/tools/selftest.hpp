// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "invsmooth/dynamics.hpp"

namespace invsmooth::cli {

using AdjointFn = std::function<MatQ(const GroupElement&)>;

struct SelftestOptions {
  /// Multiplies every threshold; values below 1 tighten the suite.
  double tol_scale = 1.0;
  std::uint64_t seed = 1;
  /// Adjoint used to build F in the log-linearity checks. Replaceable so a
  /// corrupted kernel can be shown to trip the suite.
  AdjointFn adjoint = [](const GroupElement& g) { return invsmooth::adjoint(g); };
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

/// max over samples of |f(x exp(xi)) - f(x) exp(F xi)| with F built from
/// `adjoint`, x random and |xi| <= 1.
double log_linearity_error(const GroupAffineStep& s, int samples, std::mt19937_64& rng, const AdjointFn& adjoint);

std::vector<CheckResult> run_selftest(const SelftestOptions& opts);

}  // namespace invsmooth::cli
