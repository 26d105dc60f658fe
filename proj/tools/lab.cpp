// lab: experiment runner, acceptance suite and class-test tables.
//
//   lab run <experiment> --config FILE [--seed N] [--out DIR] [--threads K]
//   lab verify [--only 1,5] [--out DIR] [--threads K] [--set name=value]
//   lab classtable --family F --params a,b [--tests t1,t2] [--nu v | --param v]
//   lab classtable --expression EXPR --monotone M [--tests t1,t2]
//
// Exit codes: 0 pass, 1 acceptance failure, 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bwlab/errors.hpp"
#include "bwlab/lab/acceptance.hpp"
#include "bwlab/lab/config.hpp"
#include "bwlab/lab/csv.hpp"
#include "bwlab/lab/experiments.hpp"
#include "bwlab/lab/report.hpp"
#include "bwlab/version.hpp"

namespace {

namespace lab = bwlab::lab;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

std::filesystem::path defaults_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BWLAB_DEFAULTS")) return env;
  return BWLAB_DEFAULTS_FILE;
}

lab::Defaults load_defaults(const std::string& flag, const std::vector<std::string>& sets) {
  lab::Defaults d = lab::load_defaults(defaults_path(flag));
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw bwlab::ConfigError("--set expects name=value, got '" + s + "'");
    try {
      std::size_t used = 0;
      const std::string rhs = s.substr(eq + 1);
      const double v = std::stod(rhs, &used);
      if (used != rhs.size()) throw std::invalid_argument(rhs);
      d.thresholds.set(s.substr(0, eq), v);
    } catch (const std::logic_error&) {
      throw bwlab::ConfigError("--set: '" + s.substr(eq + 1) + "' is not a number");
    }
  }
  return d;
}

std::string json_array(const std::vector<double>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << lab::format_double(v[i]);
  os << ']';
  return os.str();
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk / Bessel-process laboratory"};
  app.set_version_flag("--version", std::string(bwlab::kVersionString));
  app.require_subcommand(1);

  std::string defaults_flag;
  int threads = 1;
  app.add_option("--defaults", defaults_flag, "Thresholds and acceptance file")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string experiment, config_file, out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("experiment", experiment, "Experiment id")->required();
  run->add_option("--config", config_file, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override seed_base");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  std::vector<int> only;
  std::vector<std::string> sets;
  std::string verify_out;
  verify->add_option("--only", only, "Criteria to run")->delimiter(',');
  verify->add_option("--set", sets, "Threshold override name=value");
  verify->add_option("--out", verify_out, "Write each experiment's CSV/JSON here");
  verify->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* table = app.add_subcommand("classtable", "Class-test verdicts for a boundary family");
  std::string family, expression, monotone, table_out;
  std::vector<double> params;
  std::vector<std::string> tests;
  std::optional<double> nu, param;
  table->add_option("--family", family, "sqrt_loglog | power_log | inverse_log_pow | reciprocal_loglog | "
                                        "scaled_loglog | expression (implied by --expression)");
  table->add_option("--params", params, "Family parameters")->delimiter(',');
  table->add_option("--expression", expression, "Boundary function in x (family expression)");
  table->add_option("--monotone", monotone, "non-decreasing | non-increasing | log-ratio-non-decreasing");
  table->add_option("--tests", tests, "Test ids (default: all matching the monotonicity)")->delimiter(',');
  table->add_option("--nu", nu, "Bessel order; series use B = 2nu + 1");
  table->add_option("--param", param, "Raw test parameter (nu or B) for every test");
  table->add_option("--out", table_out, "Also write exp-classtable CSV/JSON here");
  table->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*run) {
      const lab::Defaults d = load_defaults(defaults_flag, {});
      lab::ExperimentConfig c = lab::load_config(config_file);
      if (c.experiment != experiment)
        throw bwlab::ConfigError("config is for '" + c.experiment + "', not '" + experiment + "'");
      if (seed) lab::override_seed(c, *seed);
      if (!out_dir.empty()) lab::override_out_dir(c, out_dir);
      const lab::StatReport r = lab::run_experiment(c, d.thresholds, threads);
      lab::write_report(r, c.out_dir);
      for (const auto& ch : r.checks)
        std::cout << (ch.pass ? "PASS  " : "FAIL  ") << ch.name << " = " << lab::format_short(ch.value) << "  ("
                  << ch.rule << (ch.gating ? "" : ", non-gating") << ")\n";
      std::cout << "wrote " << (std::filesystem::path(c.out_dir) / (r.experiment + ".{csv,json,timing.json}")).string()
                << "\n";
      return r.pass() ? kPass : kFail;
    }

    if (*verify) {
      const lab::Defaults d = load_defaults(defaults_flag, sets);
      const std::vector<int> ids = only.empty() ? lab::criterion_ids() : only;
      bool ok = true;
      for (int id : ids) {
        const lab::CriterionResult r = lab::run_criterion(id, d, threads);
        std::cout << lab::format_line(r) << std::endl;
        if (r.gating && !r.pass) ok = false;
        if (!verify_out.empty())
          for (const auto& rep : r.reports)
            if (!rep.csv.empty()) {
              lab::StatReport named = rep;
              named.experiment = "criterion" + std::to_string(id) + "-" + rep.experiment;
              lab::write_report(named, verify_out);
            }
      }
      return ok ? kPass : kFail;
    }

    if (*table) {
      if (family.empty() && !expression.empty()) family = "expression";
      if (family.empty()) throw bwlab::ConfigError("classtable needs --family or --expression");
      const lab::Defaults d = load_defaults(defaults_flag, {});
      std::ostringstream cfg;
      cfg << "{\"experiment\": \"exp-classtable\"";
      if (nu) cfg << ", \"nu\": " << lab::format_double(*nu);
      cfg << ", \"classtable\": {\"family\": " << json_string(family);
      if (!params.empty()) cfg << ", \"params\": " << json_array(params);
      if (!expression.empty()) cfg << ", \"expression\": " << json_string(expression);
      if (!monotone.empty()) cfg << ", \"monotone\": " << json_string(monotone);
      if (param) cfg << ", \"param\": " << lab::format_double(*param);
      if (!tests.empty()) {
        cfg << ", \"tests\": [";
        for (std::size_t i = 0; i < tests.size(); ++i) cfg << (i ? ", " : "") << json_string(tests[i]);
        cfg << "]";
      }
      cfg << "}}";
      const lab::ExperimentConfig c = lab::parse_config(cfg.str());
      const lab::StatReport r = lab::run_experiment(c, d.thresholds, threads);
      std::cout << r.csv;
      if (!table_out.empty()) lab::write_report(r, table_out);
      return r.pass() ? kPass : kFail;
    }
  } catch (const bwlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
