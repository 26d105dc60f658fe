#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "bwlab/besselsim.hpp"
#include "bwlab/embed.hpp"
#include "bwlab/errors.hpp"
#include "bwlab/lab/rng.hpp"
#include "bwlab/lab/stats.hpp"
#include "bwlab/walklaw.hpp"
#include "bwlab/walksim.hpp"

using namespace bwlab;
using namespace bwlab::embed;
using specfun::BesselOrder;

namespace {

Embedding run(double nu, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  lab::RngStream rng(seed, stream);
  return embed_online(BesselOrder(nu), n, besselsim::Scheme{}, rng);
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("embedded walk shape") {
  const Embedding e = run(0.5, 20000, 1, 0);
  REQUIRE(e.x.size() >= 20001);
  CHECK(e.x[1] == 1);
  CHECK(e.x[2] == 2);
  CHECK(e.y_int.size() == 20001);
  for (std::size_t k = 1; k < e.x.size(); ++k) {
    REQUIRE(std::abs(e.x[k] - e.x[k - 1]) == 1);
    REQUIRE(e.t[k] > e.t[k - 1]);
    REQUIRE(e.x[k] >= 1);
  }
  for (std::size_t k = 0; k < e.j.size(); ++k) REQUIRE(e.j[k] <= e.x[k]);
  for (std::size_t k = 0; k < e.i_int.size(); ++k) {
    REQUIRE(e.i_int[k] <= e.y_int[k]);
    REQUIRE(e.y_int[k] <= e.m_int[k]);
  }
}

TEST_CASE("up-step frequencies per level match the Bessel-derived law") {
  for (double nu : {0.5, 1.0}) {
    std::map<walklaw::Level, std::pair<double, double>> ups;  // level -> (up, total)
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Embedding e = run(nu, 10000, 2, s);
      for (std::size_t k = 3; k < e.x.size(); ++k) {
        auto& c = ups[e.x[k - 1]];
        c.first += e.x[k] > e.x[k - 1];
        c.second += 1;
      }
    }
    double chi = 0.0;
    int dof = 0;
    for (const auto& [R, c] : ups) {
      if (R < 2 || R > 50 || c.second < 50) continue;
      const double p = 0.5 + walklaw::p_bessel(nu, R);
      chi += std::pow(c.first - c.second * p, 2) / (c.second * p * (1 - p));
      ++dof;
    }
    CAPTURE(nu);
    REQUIRE(dof >= 10);
    CHECK(lab::chi_square_sf(chi, dof) > 0.01);
  }
}

TEST_CASE("mean stop-time increments per level match the band exit time") {
  const double nu = 1.0;
  std::map<walklaw::Level, std::vector<double>> dt;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Embedding e = run(nu, 10000, 3, s);
    for (std::size_t k = 3; k < e.x.size(); ++k)
      if (e.x[k - 1] <= 12) dt[e.x[k - 1]].push_back(e.t[k] - e.t[k - 1]);
  }
  for (const auto& [R, v] : dt) {
    if (v.size() < 200) continue;
    const auto sm = lab::summarize(v);
    const double want = specfun::expected_exit_time(BesselOrder(nu), specfun::Interval(R - 1.0, R, R + 1.0));
    CAPTURE(R);
    CHECK(std::abs(sm.mean - want) < 4.0 * sm.std_error);
  }
}

TEST_CASE("stop times track n sublinearly") {
  const std::vector<std::size_t> grid = {100, 1000, 10000, 100000};
  std::vector<double> mean(grid.size(), 0.0);
  const int seeds = 12;
  for (int s = 0; s < seeds; ++s) {
    const Embedding e = run(0.5, 100000, 4, std::uint64_t(s));
    for (std::size_t g = 0; g < grid.size(); ++g) mean[g] += std::abs(e.t[grid[g]] - double(grid[g])) / seeds;
  }
  std::vector<double> n(grid.begin(), grid.end());
  CHECK(lab::loglog_fit(n, mean).slope <= 0.6);
}

TEST_CASE("embedded and direct walks have the same X_n / sqrt(n) law") {
  const std::size_t n = 10000;
  std::vector<double> a, b;
  walklaw::UpProbabilityTable e(walklaw::WalkLaw::bessel(0.5));
  for (std::uint64_t s = 0; s < 200; ++s) {
    a.push_back(double(run(0.5, n, 5, s).x[n]) / std::sqrt(double(n)));
    lab::RngStream rng(6, s);
    b.push_back(double(walksim::walk_position(e, n, rng)) / std::sqrt(double(n)));
  }
  CHECK(lab::ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("discrepancy and extrema exponents") {
  const std::vector<std::size_t> grid = {100, 316, 1000, 3162, 10000, 31623, 100000};
  std::vector<std::vector<double>> running;
  std::vector<double> maxd(grid.size(), 0.0), infd(grid.size(), 0.0);
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    const Embedding e = run(0.5, 100000, 7, std::uint64_t(s));
    running.push_back(running_discrepancy(e));
    const auto ex = extrema_discrepancy(e);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      maxd[g] += ex.max_diff[grid[g]] / seeds;
      infd[g] += ex.inf_diff[grid[g]] / seeds;
    }
  }
  const auto fit = discrepancy_exponent(running, grid);
  CHECK(fit.fit.slope >= 0.15);
  CHECK(fit.fit.slope <= 0.40);
  std::vector<double> n(grid.begin(), grid.end());
  CHECK(lab::loglog_fit(n, maxd).slope <= 0.40);
  CHECK(lab::loglog_fit(n, infd).slope <= 0.45);

  CHECK_THROWS_AS(discrepancy_exponent(running, {1000}), DomainError);
  CHECK_THROWS_AS(discrepancy_exponent(running, {100, 1000}), DomainError);
  running.resize(10);
  CHECK_THROWS_AS(discrepancy_exponent(running, grid), DomainError);
}

TEST_CASE("embedding a stored path") {
  besselsim::Scheme s;
  s.fine_dt = 1e-3;
  lab::RngStream rng(8, 0);
  const auto path = besselsim::simulate_bessel(BesselOrder(1.0), 200.0, s, rng);
  const Embedding e = embed::embed(path, 0);
  REQUIRE(e.x.size() > 3);
  CHECK(e.x[1] == 1);
  for (std::size_t k = 1; k < e.x.size(); ++k) {
    REQUIRE(std::abs(e.x[k] - e.x[k - 1]) == 1);
    REQUIRE(e.t[k] > e.t[k - 1]);
  }
  const Embedding partial = embed::embed(path, 1000000);
  CHECK_FALSE(partial.complete);
}

}
