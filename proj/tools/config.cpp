// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace invsmooth::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos || trim(body.substr(0, eq)).empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

void KeyValueConfig::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos || trim(pair.substr(0, eq)).empty()) {
    throw ConfigError("--set expects KEY=VALUE, got '" + pair + "'");
  }
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_number<double>(key, it->second);
  if (!std::isfinite(v)) throw ConfigError("key '" + key + "' must be finite");
  return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<int>(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.empty() && it->second.front() == '-') throw ConfigError("key '" + key + "' must be non-negative");
  return parse_number<std::uint64_t>(key, it->second);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  }
}

std::vector<RetractionKind> retractions_from(const KeyValueConfig& cfg, const std::vector<RetractionKind>& fallback) {
  const std::string list = cfg.get_string("retraction", "");
  if (trim(list).empty()) return fallback;
  std::vector<RetractionKind> out;
  std::istringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    const auto kind = parse_retraction(trim(name));
    if (!kind) throw ConfigError("unknown retraction '" + trim(name) + "' (use invariant, forster or gtsam)");
    if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
  }
  if (out.empty()) throw ConfigError("retraction list is empty");
  return out;
}

Robot2dExperiment robot2d_experiment(const KeyValueConfig& cfg) {
  Robot2dExperiment ex;
  auto& m = ex.model;
  m.n_steps = cfg.get_int("steps", m.n_steps);
  m.speed = cfg.get_double("speed", m.speed);
  m.dt = cfg.get_double("dt", m.dt);
  m.heading_error = cfg.get_double("heading_error", m.heading_error);
  m.heading_sigma = cfg.get_double("heading_sigma", m.heading_sigma);
  const double gps_sigma = cfg.get_double("gps_sigma", 1.0);
  m.gps_cov = gps_sigma * gps_sigma * Eigen::Matrix2d::Identity();
  ex.max_iters = cfg.get_int("max_iters", ex.max_iters);
  ex.tol = cfg.get_double("tol", ex.tol);
  ex.retractions = retractions_from(cfg, {RetractionKind::Invariant, RetractionKind::GtsamLinear});

  if (m.n_steps < 0) throw ConfigError("steps must be non-negative");
  if (!(m.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(m.heading_sigma > 0.0) || !(gps_sigma > 0.0)) throw ConfigError("sigmas must be positive");
  if (ex.max_iters < 0 || !(ex.tol > 0.0)) throw ConfigError("max_iters must be >= 0 and tol > 0");
  return ex;
}

InsExperiment ins_experiment(const KeyValueConfig& cfg) {
  InsExperiment ex;
  auto& m = ex.model;
  m.imu_rate = cfg.get_double("imu_rate", m.imu_rate);
  m.gps_rate = cfg.get_double("gps_rate", m.gps_rate);
  m.window_size = cfg.get_int("window", m.window_size);
  m.sigma_g_deg_s = cfg.get_double("sigma_g", m.sigma_g_deg_s);
  m.sigma_a = cfg.get_double("sigma_a", m.sigma_a);
  m.sigma_n = cfg.get_double("sigma_n", m.sigma_n);
  m.sigma_p0 = cfg.get_double("sigma_p0", m.sigma_p0);
  m.sigma_v0 = cfg.get_double("sigma_v0", m.sigma_v0);
  m.sigma_yaw0_deg = cfg.get_double("sigma_yaw0", m.sigma_yaw0_deg);
  m.sigma_tilt0_deg = cfg.get_double("sigma_tilt0", m.sigma_tilt0_deg);
  m.heading_error_deg = cfg.get_double("heading_error_deg", m.heading_error_deg);
  m.true_yaw_deg = cfg.get_double("true_yaw_deg", m.true_yaw_deg);
  m.stationary_duration = cfg.get_double("stationary", m.stationary_duration);
  m.moving_duration = cfg.get_double("moving", m.moving_duration);
  m.cruise_speed = cfg.get_double("cruise_speed", m.cruise_speed);
  ex.runs = cfg.get_int("runs", ex.runs);
  ex.seed = cfg.get_u64("seed", ex.seed);
  ex.sensor_noise = cfg.get_bool("sensor_noise", ex.sensor_noise);
  ex.correct_init = cfg.get_bool("correct_init", ex.correct_init);
  ex.retractions = retractions_from(
      cfg, {RetractionKind::Invariant, RetractionKind::ForsterSplit, RetractionKind::GtsamLinear});

  if (ex.runs < 1) throw ConfigError("runs must be at least 1");
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return ex;
}

}  // namespace invsmooth::cli
