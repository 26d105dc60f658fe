#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bwlab/walklaw.hpp"

namespace bwlab::lab {

/// Experiment configuration, read from JSON.
///
///   {
///     "experiment":   "exp-geometric",            required
///     "seed_base":    1,                           default 0
///     "law":          {"family": "bessel", "nu": 0.5},
///     "law2":         {"family": "power", "B": 2, "gamma": 2, "C": 1, "rule": "none"},
///     "nu":           0.5,                         Bessel order (process experiments)
///     "n":            [1000, 10000] | {"lo": 1000, "hi": 1000000, "per_decade": 4},
///     "R":            [5, 20] | {"lo": 16, "hi": 10000} (every integer),
///     "trajectories": 100000,                      required, > 0 (not for exp-classtable)
///     "repetitions":  1,
///     "tolerances":   {"eps": 0.05, ...},          per-experiment numeric knobs
///     "thresholds":   {"gof_alpha": 0.01, ...},    overrides of the defaults file
///     "classtable":   {"tests": ["bessel-upper"], "family": "sqrt_loglog",
///                      "params": [1.9, 2.1], "param": 0.5},
///     "out_dir":      "out"
///   }
///
/// Law families: bessel {nu}; power {B, gamma, C, rule: none|plus|minus|
/// alternating}; table {p: [...], tail: power|constant, tail_value};
/// constant {p}. Unknown keys are rejected.
///
/// Every random draw is determined by seed_base: work item i of a study uses
/// RngStream(sub_base(seed_base, tag), i), tags fixed per experiment.
struct ClassTableSpec {
  std::vector<std::string> tests;  // empty: all tests
  std::string family;
  std::vector<double> params;
  std::string expression;          // family "expression"
  std::string monotone;            // for expressions
  std::optional<double> param;     // ν or B; default per test
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed_base = 0;
  std::optional<walklaw::WalkLaw> law;
  std::optional<walklaw::WalkLaw> law2;
  std::optional<double> nu;
  std::vector<std::uint64_t> n_grid;
  std::vector<walklaw::Level> r_grid;
  std::uint64_t trajectories = 0;
  std::uint64_t repetitions = 1;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> thresholds;
  std::optional<ClassTableSpec> classtable;
  std::string out_dir = ".";
  std::string echo;  // canonical JSON of the input (sorted keys)

  double tolerance(std::string_view key, double fallback) const;
};

const std::vector<std::string>& experiment_ids();

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& file);

// Command-line overrides; the echo is updated to match.
void override_seed(ExperimentConfig& c, std::uint64_t seed_base);
void override_out_dir(ExperimentConfig& c, const std::string& dir);

/// Named acceptance thresholds.
class Thresholds {
 public:
  double get(std::string_view name) const;  // ConfigError when missing
  void set(const std::string& name, double v) { values_[name] = v; }
  const std::map<std::string, double, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, double, std::less<>> values_;
};

/// Contents of the versioned defaults file: thresholds plus the experiment
/// configurations each acceptance criterion runs.
struct Defaults {
  std::string version;
  Thresholds thresholds;
  std::map<int, std::vector<ExperimentConfig>> acceptance;
};

Defaults parse_defaults(std::string_view json_text);
Defaults load_defaults(const std::filesystem::path& file);

}  // namespace bwlab::lab
