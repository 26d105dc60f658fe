#include "bwlab/lab/report.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"
#include "bwlab/version.hpp"

namespace bwlab::lab {

using nlohmann::ordered_json;

namespace {

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << s;
  if (!out) throw ConfigError("write failed: " + p.string());
}

}  // namespace

Check& StatReport::check_le(std::string name, double v, double hi) {
  checks.push_back({std::move(name), v, "<= " + format_short(hi), v <= hi, true});
  return checks.back();
}

Check& StatReport::check_ge(std::string name, double v, double lo) {
  checks.push_back({std::move(name), v, ">= " + format_short(lo), v >= lo, true});
  return checks.back();
}

Check& StatReport::check_in(std::string name, double v, double lo, double hi) {
  checks.push_back({std::move(name), v, "in [" + format_short(lo) + ", " + format_short(hi) + "]",
                    lo <= v && v <= hi, true});
  return checks.back();
}

Check& StatReport::check_true(std::string name, bool ok, double v, std::string rule) {
  checks.push_back({std::move(name), v, std::move(rule), ok, true});
  return checks.back();
}

bool StatReport::pass() const {
  for (const auto& c : checks)
    if (c.gating && !c.pass) return false;
  return true;
}

std::string summary_json(const StatReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["version"] = kVersionString;
  j["config"] = r.config_echo.empty() ? ordered_json::object() : ordered_json::parse(r.config_echo);
  ordered_json m = ordered_json::object();
  for (const auto& [k, v] : r.metrics) m[k] = num(v);
  j["metrics"] = m;
  ordered_json cs = ordered_json::array();
  for (const auto& c : r.checks)
    cs.push_back({{"name", c.name}, {"value", num(c.value)}, {"rule", c.rule},
                  {"pass", c.pass}, {"gating", c.gating}});
  j["checks"] = cs;
  j["pass"] = r.pass();
  return j.dump(2) + "\n";
}

std::string timing_json(const StatReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["wall_seconds"] = r.wall_seconds;
  j["threads"] = r.threads;
  return j.dump(2) + "\n";
}

void write_report(const StatReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / (r.experiment + ".csv"), r.csv);
  write_file(dir / (r.experiment + ".json"), summary_json(r));
  write_file(dir / (r.experiment + ".timing.json"), timing_json(r));
}

}  // namespace bwlab::lab
