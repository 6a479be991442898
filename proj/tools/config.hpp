// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value experiment manifests. Later sources override earlier ones:
// built-in defaults, then the --config file, then --set pairs, then flags.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "invsmooth/models.hpp"
#include "invsmooth/smoother/retraction.hpp"

namespace invsmooth::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class KeyValueConfig {
 public:
  /// Parses "key = value" lines; blank lines and lines starting with '#'
  /// are skipped.
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Parses "KEY=VALUE".
  void set_pair(const std::string& pair);
  void merge(const KeyValueConfig& other);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Rejects keys outside `known`, which catches typos in manifests.
  void require_known(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Comma-separated retraction names; an empty value yields `fallback`.
std::vector<RetractionKind> retractions_from(const KeyValueConfig& cfg, const std::vector<RetractionKind>& fallback);

struct Robot2dExperiment {
  models::Robot2dConfig model;
  std::vector<RetractionKind> retractions;
  int max_iters = 10;
  double tol = 1e-10;
};

struct InsExperiment {
  models::InsConfig model;
  std::vector<RetractionKind> retractions;
  int runs = 10;
  std::uint64_t seed = 1;
  bool sensor_noise = true;
  bool correct_init = false;
};

Robot2dExperiment robot2d_experiment(const KeyValueConfig& cfg);
InsExperiment ins_experiment(const KeyValueConfig& cfg);

}  // namespace invsmooth::cli
