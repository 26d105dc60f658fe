#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace bwlab::lab {

struct Check {
  std::string name;
  double value = 0.0;
  std::string rule;  // e.g. "<= 0.35"
  bool pass = false;
  bool gating = true;
};

/// Outcome of one experiment run. Everything except wall_seconds is a
/// function of (config, seed base).
struct StatReport {
  std::string experiment;
  std::string config_echo;  // JSON
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Check> checks;
  std::string csv;
  double wall_seconds = 0.0;
  int threads = 1;

  void metric(std::string name, double v) { metrics.emplace_back(std::move(name), v); }
  Check& check_le(std::string name, double v, double hi);
  Check& check_ge(std::string name, double v, double lo);
  Check& check_in(std::string name, double v, double lo, double hi);
  Check& check_true(std::string name, bool ok, double v = 0.0, std::string rule = "holds");
  bool pass() const;  // all gating checks
};

// {experiment, version, config, metrics, checks, pass}; no timing.
std::string summary_json(const StatReport& r);
std::string timing_json(const StatReport& r);

// Writes <experiment>.csv, <experiment>.json and <experiment>.timing.json.
void write_report(const StatReport& r, const std::filesystem::path& dir);

}  // namespace bwlab::lab
