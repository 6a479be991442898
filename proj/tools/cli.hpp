// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "config.hpp"
#include "selftest.hpp"

namespace invsmooth::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

/// Writes length_per_iter.csv and trajectory_iter<k>.csv into `out_dir`.
void cmd_robot2d(const Robot2dExperiment& ex, const std::filesystem::path& out_dir, std::ostream& log);

/// Writes yaw_error.csv and summary.csv into `out_dir`.
void cmd_ins_align(const InsExperiment& ex, const std::filesystem::path& out_dir, std::ostream& log);

/// Prints one verdict line per property and returns kOk or kCheckFailed.
int cmd_selftest(const SelftestOptions& opts, std::ostream& log);

/// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invsmooth::cli
