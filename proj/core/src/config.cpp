#include "bwlab/lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bwlab/errors.hpp"
#include "bwlab/localtime.hpp"

namespace bwlab::lab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* a : keys) known = known || k == a;
    if (!known) fail(where, "unknown key '" + k + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

double number_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  return number(j.at(key), where + "." + key);
}

std::uint64_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v <= 0) fail(where, "must be positive");
  return static_cast<std::uint64_t>(v);
}

walklaw::WalkLaw parse_law(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    fail(where, "law needs a string 'family'");
  const std::string fam = j.at("family").get<std::string>();
  try {
    if (fam == "bessel") {
      only_keys(j, where, {"family", "nu"});
      return walklaw::WalkLaw::bessel(number_at(j, "nu", where));
    }
    if (fam == "power") {
      only_keys(j, where, {"family", "B", "gamma", "C", "rule"});
      auto rule = walklaw::Perturbation::None;
      if (j.contains("rule")) {
        const std::string r = j.at("rule").is_string() ? j.at("rule").get<std::string>() : "";
        if (r == "none") rule = walklaw::Perturbation::None;
        else if (r == "plus") rule = walklaw::Perturbation::Plus;
        else if (r == "minus") rule = walklaw::Perturbation::Minus;
        else if (r == "alternating") rule = walklaw::Perturbation::Alternating;
        else fail(where + ".rule", "expected none|plus|minus|alternating");
      }
      const double C = j.contains("C") ? number(j.at("C"), where + ".C") : 0.0;
      const double gamma = j.contains("gamma") ? number(j.at("gamma"), where + ".gamma") : 2.0;
      return walklaw::WalkLaw::power(number_at(j, "B", where), gamma, C, rule);
    }
    if (fam == "table") {
      only_keys(j, where, {"family", "p", "tail", "tail_value"});
      if (!j.contains("p") || !j.at("p").is_array()) fail(where, "table needs an array 'p'");
      std::vector<double> p;
      for (const auto& v : j.at("p")) p.push_back(number(v, where + ".p"));
      auto tail = walklaw::Explicit::Tail::Constant;
      if (j.contains("tail")) {
        const std::string t = j.at("tail").is_string() ? j.at("tail").get<std::string>() : "";
        if (t == "power") tail = walklaw::Explicit::Tail::Power;
        else if (t != "constant") fail(where + ".tail", "expected power|constant");
      }
      const double tv = j.contains("tail_value") ? number(j.at("tail_value"), where + ".tail_value") : 0.0;
      return walklaw::WalkLaw::table(std::move(p), tail, tv);
    }
    if (fam == "constant") {
      only_keys(j, where, {"family", "p"});
      return walklaw::WalkLaw::constant(number_at(j, "p", where));
    }
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where, "unknown law family '" + fam + "'");
}

template <class T>
std::vector<T> parse_grid(const json& j, const std::string& where) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(static_cast<T>(count(v, where)));
    if (out.empty()) fail(where, "empty grid");
    return out;
  }
  only_keys(j, where, {"lo", "hi", "per_decade"});
  if (!j.contains("lo") || !j.contains("hi")) fail(where, "grid needs 'lo' and 'hi'");
  const auto lo = static_cast<walklaw::Level>(count(j.at("lo"), where + ".lo"));
  const auto hi = static_cast<walklaw::Level>(count(j.at("hi"), where + ".hi"));
  if (hi < lo) fail(where, "hi < lo");
  if (j.contains("per_decade")) {
    const auto k = static_cast<int>(count(j.at("per_decade"), where + ".per_decade"));
    for (auto v : localtime::log_grid(lo, hi, k)) out.push_back(static_cast<T>(v));
  } else {
    if (hi - lo > 100'000'000) fail(where, "integer range too long");
    for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<T>(v));
  }
  return out;
}

std::map<std::string, double> parse_numbers(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = number(v, where + "." + k);
  return out;
}

ClassTableSpec parse_classtable(const json& j) {
  const std::string where = "classtable";
  only_keys(j, where, {"tests", "family", "params", "expression", "monotone", "param"});
  ClassTableSpec s;
  if (j.contains("tests")) {
    if (!j.at("tests").is_array()) fail(where + ".tests", "expected an array");
    for (const auto& t : j.at("tests")) {
      if (!t.is_string()) fail(where + ".tests", "expected strings");
      s.tests.push_back(t.get<std::string>());
    }
  }
  if (!j.contains("family") || !j.at("family").is_string()) fail(where, "missing string 'family'");
  s.family = j.at("family").get<std::string>();
  if (j.contains("params")) {
    if (!j.at("params").is_array()) fail(where + ".params", "expected an array");
    for (const auto& v : j.at("params")) s.params.push_back(number(v, where + ".params"));
  }
  if (j.contains("expression")) {
    if (!j.at("expression").is_string()) fail(where + ".expression", "expected a string");
    s.expression = j.at("expression").get<std::string>();
  }
  if (j.contains("monotone")) {
    if (!j.at("monotone").is_string()) fail(where + ".monotone", "expected a string");
    s.monotone = j.at("monotone").get<std::string>();
  }
  if (j.contains("param")) s.param = number(j.at("param"), where + ".param");
  if (s.family == "expression" ? s.expression.empty() : s.params.empty())
    fail(where, "needs 'params' (or 'expression' for family expression)");
  return s;
}

ExperimentConfig parse_config_json(const json& j) {
  only_keys(j, "config",
            {"experiment", "seed_base", "law", "law2", "nu", "n", "R", "trajectories", "repetitions",
             "tolerances", "thresholds", "classtable", "out_dir"});
  ExperimentConfig c;
  if (!j.contains("experiment") || !j.at("experiment").is_string())
    fail("config", "missing string 'experiment'");
  c.experiment = j.at("experiment").get<std::string>();
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), c.experiment) == ids.end())
    fail("config.experiment", "unknown experiment '" + c.experiment + "'");

  if (j.contains("seed_base")) {
    if (!j.at("seed_base").is_number_unsigned() && !j.at("seed_base").is_number_integer())
      fail("config.seed_base", "expected a non-negative integer");
    if (!j.at("seed_base").is_number_unsigned() && j.at("seed_base").get<std::int64_t>() < 0)
      fail("config.seed_base", "expected a non-negative integer");
    c.seed_base = j.at("seed_base").get<std::uint64_t>();
  }
  if (j.contains("law")) c.law = parse_law(j.at("law"), "config.law");
  if (j.contains("law2")) c.law2 = parse_law(j.at("law2"), "config.law2");
  if (j.contains("nu")) {
    c.nu = number(j.at("nu"), "config.nu");
    if (!(*c.nu > 0.0)) fail("config.nu", "must be positive");
  }
  if (j.contains("n")) c.n_grid = parse_grid<std::uint64_t>(j.at("n"), "config.n");
  if (j.contains("R")) c.r_grid = parse_grid<walklaw::Level>(j.at("R"), "config.R");

  if (c.experiment != "exp-classtable") {
    if (!j.contains("trajectories") || j.at("trajectories").is_null())
      fail("config", "missing 'trajectories'");
    c.trajectories = count(j.at("trajectories"), "config.trajectories");
  }
  if (j.contains("repetitions")) c.repetitions = count(j.at("repetitions"), "config.repetitions");
  if (j.contains("tolerances")) c.tolerances = parse_numbers(j.at("tolerances"), "config.tolerances");
  if (j.contains("thresholds")) c.thresholds = parse_numbers(j.at("thresholds"), "config.thresholds");
  if (j.contains("classtable")) c.classtable = parse_classtable(j.at("classtable"));
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) fail("config.out_dir", "expected a string");
    c.out_dir = j.at("out_dir").get<std::string>();
  }
  c.echo = j.dump();
  return c;
}

json parse_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

double ExperimentConfig::tolerance(std::string_view key, double fallback) const {
  const auto it = tolerances.find(std::string(key));
  return it == tolerances.end() ? fallback : it->second;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "exp-geometric", "exp-exponential", "exp-embed",     "exp-localtime",
      "exp-couple",    "exp-escape",      "exp-limitlaw",  "exp-classtable",
  };
  return ids;
}

ExperimentConfig parse_config(std::string_view json_text) {
  return parse_config_json(parse_text(json_text, "config"));
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  return parse_config(read_file(file));
}

void override_seed(ExperimentConfig& c, std::uint64_t seed_base) {
  json j = c.echo.empty() ? json::object() : json::parse(c.echo);
  j["seed_base"] = seed_base;
  c.seed_base = seed_base;
  c.echo = j.dump();
}

void override_out_dir(ExperimentConfig& c, const std::string& dir) {
  json j = c.echo.empty() ? json::object() : json::parse(c.echo);
  j["out_dir"] = dir;
  c.out_dir = dir;
  c.echo = j.dump();
}

double Thresholds::get(std::string_view name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("threshold '" + std::string(name) + "' is not defined");
  return it->second;
}

Defaults parse_defaults(std::string_view json_text) {
  const json j = parse_text(json_text, "defaults");
  only_keys(j, "defaults", {"version", "thresholds", "acceptance"});
  Defaults d;
  if (!j.contains("version") || !j.at("version").is_string())
    fail("defaults", "missing string 'version'");
  d.version = j.at("version").get<std::string>();
  if (j.contains("thresholds"))
    for (const auto& [k, v] : parse_numbers(j.at("thresholds"), "defaults.thresholds"))
      d.thresholds.set(k, v);
  if (j.contains("acceptance")) {
    const json& a = j.at("acceptance");
    if (!a.is_object()) fail("defaults.acceptance", "expected an object");
    for (const auto& [k, v] : a.items()) {
      int id = 0;
      try {
        id = std::stoi(k);
      } catch (const std::exception&) {
        fail("defaults.acceptance", "keys are criterion numbers, got '" + k + "'");
      }
      if (!v.is_array()) fail("defaults.acceptance." + k, "expected an array of configs");
      for (const auto& c : v) d.acceptance[id].push_back(parse_config_json(c));
    }
  }
  return d;
}

Defaults load_defaults(const std::filesystem::path& file) { return parse_defaults(read_file(file)); }

}  // namespace bwlab::lab
