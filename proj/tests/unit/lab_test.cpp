#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "bwlab/errors.hpp"
#include "bwlab/lab/acceptance.hpp"
#include "bwlab/lab/config.hpp"
#include "bwlab/lab/csv.hpp"
#include "bwlab/lab/experiments.hpp"
#include "bwlab/lab/report.hpp"
#include "bwlab/lab/rng.hpp"
#include "bwlab/lab/stats.hpp"

using namespace bwlab;
using namespace bwlab::lab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Thresholds repo_thresholds() { return load_defaults(BWLAB_DEFAULTS_FILE).thresholds; }

const char* kGeometric = R"({"experiment": "exp-geometric", "seed_base": 12,
  "law": {"family": "bessel", "nu": 0.5}, "R": [5, 8], "trajectories": 3000, "repetitions": 4})";

}  // namespace

TEST_SUITE("lab") {

TEST_CASE("rng reference words") {
  // SplitMix64 seeding and xoshiro256++ evaluated independently.
  RngStream r(0, 0);
  CHECK(r.next() == 0x53175d61490b23dfULL);
  CHECK(r.next() == 0x61da6f3dc380d507ULL);
  CHECK(r.next() == 0x5c0fdf91ec9a7bfcULL);
  RngStream s(42, 7);
  CHECK(s.next() == 0x7cd9176398295297ULL);
  CHECK(s.next() == 0x8353ba51e62f56afULL);
  std::uint64_t st = 0;
  CHECK(splitmix64(st) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(9, 3), b(9, 3), c(9, 4);
  bool differ = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    REQUIRE(x == b.next());
    differ = differ || x != c.next();
  }
  CHECK(differ);
  CHECK(sub_base(5, 1) == (5ULL ^ (1ULL << 32)));
  CHECK(rng_stream(1, 2).stream_index() == 2);
}

TEST_CASE("neighbouring streams are uncorrelated") {
  const int n = 1000000;
  for (std::uint64_t idx : {1ULL, 2ULL, 1000ULL}) {
    RngStream a(0, 0), b(0, idx);
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
      const double x = a.uniform(), y = b.uniform();
      sa += x;
      sb += y;
      saa += x * x;
      sbb += y * y;
      sab += x * y;
    }
    const double cov = sab / n - sa / n * sb / n;
    const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(rho) < 0.01);
  }
}

TEST_CASE("derived variates") {
  RngStream r(3, 0);
  const int n = 200000;
  std::vector<double> u(n), e(n), g(n), gs(n), geo(n), z(n);
  for (int i = 0; i < n; ++i) {
    u[i] = r.uniform();
    REQUIRE(u[i] > 0.0);
    REQUIRE(u[i] < 1.0);
    e[i] = r.exponential(2.0);
    g[i] = r.gamma(3.5, 2.0);
    gs[i] = r.gamma(0.3, 1.0);
    geo[i] = double(r.geometric(0.2));
    z[i] = r.normal();
  }
  auto near = [](const std::vector<double>& v, double mean) {
    const auto s = summarize(v);
    return std::abs(s.mean - mean) < 4.0 * s.std_error;
  };
  CHECK(near(u, 0.5));
  CHECK(near(e, 2.0));
  CHECK(near(g, 7.0));
  CHECK(near(gs, 0.3));
  CHECK(near(geo, 5.0));
  CHECK(near(z, 0.0));
  CHECK(summarize(z).variance == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.geometric(1.0) == 1);
}

TEST_CASE("KS p-values are uniform under the null") {
  std::vector<double> pv;
  for (std::uint64_t k = 0; k < 100; ++k) {
    RngStream r(4, k);
    std::vector<double> u(500);
    for (auto& x : u) x = r.uniform();
    pv.push_back(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value);
  }
  CHECK(ks_one_sample(pv, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("chi-square of exact geometric samples passes at 1% in at least 95% of runs") {
  int pass = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    RngStream r(5, k);
    std::vector<std::uint64_t> s(10000);
    for (auto& x : s) x = r.geometric(0.1);
    pass += chi_square_geometric(s, 0.1).p_value > 0.01;
  }
  CHECK(pass >= 95);
}

TEST_CASE("two-sample KS separates shifted samples") {
  RngStream r(6, 0);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& x : a) x = r.normal();
  for (auto& x : b) x = r.normal();
  for (auto& x : c) x = r.normal() + 0.3;
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("distribution functions") {
  CHECK(kolmogorov_q(1.0) == doctest::Approx(0.2699996716773546).epsilon(1e-12));
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(student_t_quantile(0.975, 10.0) == doctest::Approx(2.228138851986274).epsilon(1e-10));
}

TEST_CASE("regression") {
  std::vector<double> x, y;
  for (double v = 1.0; v <= 1e6; v *= 3.0) {
    x.push_back(v);
    y.push_back(std::sqrt(v));
  }
  const auto f = loglog_fit(x, y);
  CHECK(std::abs(f.slope - 0.5) < 1e-12);
  CHECK(f.ci_contains(0.5));

  RngStream r(7, 0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(i);
    ys.push_back(2.0 * i + 1.0 + r.normal() * (1.0 + 0.05 * i));
  }
  const auto g = ols(xs, ys);
  CHECK(g.ci_contains(2.0));
  CHECK(g.ci_low < g.slope);
  CHECK(g.slope < g.ci_high);
  CHECK_THROWS_AS(ols(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), StatsError);
  CHECK_THROWS_AS(loglog_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, -2, 3}), StatsError);
}

TEST_CASE("small samples are rejected") {
  std::vector<double> few(10, 0.5);
  CHECK_THROWS_AS(ks_one_sample(few, [](double v) { return v; }), StatsError);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), StatsError);
}

TEST_CASE("quantiles and ranks") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({5, 1, 3}, 1.0) == 5.0);
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 25, 100}) == doctest::Approx(1.0));
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("CSV number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e17}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_short(0.1) == "0.1");
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.cell(1.5).cell(std::string_view("x"));
  w.row_end();
  CHECK(os.str() == "a,b\n1.5,x\n");
}

TEST_CASE("config parsing") {
  const auto c = parse_config(kGeometric);
  CHECK(c.experiment == "exp-geometric");
  CHECK(c.seed_base == 12);
  CHECK(c.r_grid == std::vector<walklaw::Level>{5, 8});
  CHECK(c.trajectories == 3000);
  CHECK(c.repetitions == 4);
  CHECK(c.law->bessel_nu() == 0.5);
  CHECK(c.tolerance("eps", 0.25) == 0.25);

  const auto g = parse_config(R"({"experiment": "exp-embed", "nu": 1, "trajectories": 30,
    "n": {"lo": 1000, "hi": 1000000, "per_decade": 1}, "tolerances": {"fine_dt": 0.01}})");
  CHECK(g.n_grid == std::vector<std::uint64_t>{1000, 10000, 100000, 1000000});
  CHECK(g.tolerance("fine_dt", 1.0) == 0.01);
  const auto e = parse_config(R"({"experiment": "exp-escape", "law": {"family": "bessel", "nu": 0.5},
    "R": {"lo": 16, "hi": 20}, "trajectories": 3})");
  CHECK(e.r_grid == std::vector<walklaw::Level>{16, 17, 18, 19, 20});
  const auto p = parse_config(R"({"experiment": "exp-couple", "trajectories": 2,
    "law": {"family": "power", "B": 2, "gamma": 1.5, "C": 1, "rule": "alternating"},
    "law2": {"family": "table", "p": [0.1, 0.2], "tail": "power", "tail_value": 2}})");
  CHECK(p.law->p(1) == doctest::Approx(0.5 - 1.0));  // clamped below
  CHECK(p.law2->p(2) == 0.2);
  CHECK_NOTHROW(parse_config(R"({"experiment": "exp-classtable", "classtable": {"family": "sqrt_loglog", "params": [3]}})"));
}

TEST_CASE("config schema errors") {
  for (const char* bad : {
           R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5}, "R": [5], "trajectories": 0})",
           R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5}, "R": [5]})",
           R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5}, "R": [5], "trajectories": 10, "colour": 1})",
           R"({"experiment": "exp-nothing", "trajectories": 10})",
           R"({"experiment": "exp-geometric", "law": {"family": "bessel"}, "R": [5], "trajectories": 10})",
           R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5}, "R": [5], "trajectories": -3})",
           R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5}, "R": "5", "trajectories": 10})",
           R"({"trajectories": 10})",
           R"([1, 2])",
           R"({"experiment": )",
       }) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }
}

TEST_CASE("overrides update the echo") {
  auto c = parse_config(kGeometric);
  override_seed(c, 99);
  override_out_dir(c, "elsewhere");
  CHECK(c.seed_base == 99);
  const auto j = nlohmann::json::parse(c.echo);
  CHECK(j.at("seed_base") == 99);
  CHECK(j.at("out_dir") == "elsewhere");
}

TEST_CASE("defaults file") {
  const Defaults d = load_defaults(BWLAB_DEFAULTS_FILE);
  CHECK(d.version == "1");
  CHECK(d.thresholds.get("gof_alpha") == 0.01);
  CHECK_THROWS_AS(d.thresholds.get("no_such_threshold"), ConfigError);
  for (int id : {2, 3, 5, 6, 7, 8, 9, 10}) CHECK(d.acceptance.count(id) == 1);
  CHECK_THROWS_AS(load_defaults("/nonexistent/defaults.json"), ConfigError);
}

TEST_CASE("report checks and JSON") {
  StatReport r;
  r.experiment = "exp-test";
  r.config_echo = R"({"a":1})";
  r.metric("m", std::numeric_limits<double>::quiet_NaN());
  CHECK(r.check_le("le", 1.0, 1.0).pass);
  CHECK_FALSE(r.check_ge("ge", 0.5, 1.0).pass);
  CHECK(r.check_in("in", 0.2, 0.15, 0.4).pass);
  auto& soft = r.check_true("soft", false);
  soft.gating = false;
  CHECK_FALSE(r.pass());
  r.checks.erase(r.checks.begin() + 1);
  CHECK(r.pass());
  r.wall_seconds = 1.25;
  const auto j = nlohmann::json::parse(summary_json(r));
  CHECK(j.at("experiment") == "exp-test");
  CHECK(j.at("config").at("a") == 1);
  CHECK(j.at("metrics").at("m").is_null());
  CHECK(j.at("pass") == true);
  CHECK(j.contains("version"));
  CHECK(summary_json(r).find("1.25") == std::string::npos);
  CHECK(nlohmann::json::parse(timing_json(r)).at("wall_seconds") == 1.25);

  const auto dir = std::filesystem::temp_directory_path() / "bwlab_report_test";
  std::filesystem::remove_all(dir);
  r.csv = "a\n1\n";
  write_report(r, dir / "sub");
  CHECK(slurp(dir / "sub" / "exp-test.csv") == "a\n1\n");
  CHECK(std::filesystem::exists(dir / "sub" / "exp-test.json"));
  CHECK(std::filesystem::exists(dir / "sub" / "exp-test.timing.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = int(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == int(i) * 2);
  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 17 || i == 40) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}

TEST_CASE("experiments are deterministic and independent of the thread count") {
  const Thresholds th = repo_thresholds();
  const auto c = parse_config(kGeometric);
  const auto a = run_experiment(c, th, 1);
  const auto b = run_experiment(c, th, 1);
  const auto p = run_experiment(c, th, 3);
  CHECK(a.csv == b.csv);
  CHECK(summary_json(a) == summary_json(b));
  CHECK(a.csv == p.csv);
  CHECK(summary_json(a) == summary_json(p));
  auto other = c;
  override_seed(other, 13);
  CHECK(run_experiment(other, th, 1).csv != a.csv);

  const auto limit = parse_config(R"({"experiment": "exp-limitlaw", "seed_base": 3,
    "law": {"family": "power", "B": 2, "gamma": 2, "C": 0}, "n": [2000], "trajectories": 400})");
  const auto l1 = run_experiment(limit, th, 1), l2 = run_experiment(limit, th, 2);
  CHECK(l1.csv == l2.csv);
  CHECK(summary_json(l1) == summary_json(l2));
}

TEST_CASE("geometric experiment recovers mean 10 at R = 5") {
  const auto c = parse_config(R"({"experiment": "exp-geometric", "seed_base": 1,
    "law": {"family": "bessel", "nu": 0.5}, "R": [5], "trajectories": 100000})");
  const auto r = run_experiment(c, repo_thresholds(), 1);
  CHECK(r.pass());
  bool found = false;
  for (const auto& [k, v] : r.metrics)
    if (k == "mean_R_5") {
      found = true;
      CHECK(std::abs(v - 10.0) < 0.15);
    }
  CHECK(found);
}

TEST_CASE("module errors carry the experiment id") {
  const auto c = parse_config(R"({"experiment": "exp-geometric", "law": {"family": "bessel", "nu": 0.5},
    "R": [1], "trajectories": 10})");
  try {
    run_experiment(c, repo_thresholds(), 1);
    FAIL("expected an exception");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).rfind("exp-geometric", 0) == 0);
  }
}

TEST_CASE("class table experiment") {
  const auto c = parse_config(R"({"experiment": "exp-classtable", "nu": 0.5,
    "classtable": {"tests": ["bessel-upper", "walk-upper"], "family": "sqrt_loglog", "params": [1.5, 2.0, 2.5]}})");
  const auto r = run_experiment(c, repo_thresholds(), 1);
  CHECK(r.pass());
  CHECK(r.csv.find("walk-upper,sqrt_loglog,c=2.5,2,converges") != std::string::npos);
  const auto f = classtest::BoundaryFunction::sqrt_loglog(2.0);
  CHECK_FALSE(analytic_verdict(classtest::TestId::BesselUpper, f, 0.5));
  CHECK(analytic_verdict(classtest::TestId::WalkUpper, classtest::BoundaryFunction::sqrt_loglog(2.5), 0.5) ==
        classtest::Verdict::Converges);
}

TEST_CASE("acceptance plumbing") {
  CHECK(criterion_ids().size() == 11);
  CHECK_THROWS_AS(criterion_title(12), ConfigError);
  const Defaults d = load_defaults(BWLAB_DEFAULTS_FILE);
  const auto one = run_criterion(1, d);
  CHECK(one.pass);
  CHECK(format_line(one).rfind("PASS  1  ", 0) == 0);
  CHECK(run_criterion(4, d).pass);
  Defaults empty = d;
  empty.acceptance.clear();
  CHECK_THROWS_AS(run_criterion(2, empty), ConfigError);
  CriterionResult diag;
  diag.id = 10;
  diag.title = "t";
  diag.gating = false;
  CHECK(format_line(diag).find("[non-gating]") != std::string::npos);
}

}
