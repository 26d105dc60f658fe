#include <cmath>
#include <vector>

#include <boost/math/distributions/exponential.hpp>
#include <boost/rational.hpp>

#include "doctest.h"

#include "bwlab/lab/rng.hpp"
#include "bwlab/lab/stats.hpp"
#include "bwlab/localtime.hpp"
#include "bwlab/walklaw.hpp"

using namespace bwlab;
using namespace bwlab::localtime;

namespace {
double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }
}  // namespace

TEST_SUITE("localtime") {

TEST_CASE("theta is 1 at half order") {
  for (Level R = 2; R <= 5000; R += (R < 100 ? 1 : 97)) CHECK(rel(excursion_law(0.5, R).theta, 1.0) < 1e-12);
}

TEST_CASE("theta at nu = 1, R = 2 from rational arithmetic") {
  using Q = boost::rational<long long>;
  const Q A = Q(1) - Q(1, 4), B = Q(1, 4) - Q(1, 9);
  const Q theta = Q(8) * A * B / (A + B);  // R^{2ν+1} A B / (ν (A + B))
  CHECK(theta == Q(15, 16));
  const auto law = excursion_law(1.0, 2);
  CHECK(rel(law.A, 0.75) < 1e-15);
  CHECK(rel(law.B, 5.0 / 36.0) < 1e-15);
  CHECK(rel(law.theta, 15.0 / 16.0) < 1e-14);
}

TEST_CASE("theta / p* = R / nu and p* agrees with the walk law") {
  lab::RngStream rng(1, 0);
  for (int i = 0; i < 200; ++i) {
    const double nu = 0.05 + 4.0 * rng.uniform();
    const Level R = 2 + Level(rng.uniform() * 5000);
    const auto law = excursion_law(nu, R);
    CAPTURE(nu);
    CAPTURE(R);
    CHECK(rel(law.theta / law.p_star, double(R) / nu) < 1e-10);
    CHECK(rel(law.p_star, walklaw::local_time_law(walklaw::WalkLaw::bessel(nu), R).p_star) < 1e-12);
  }
}

TEST_CASE("theta tends to 1") {
  for (double nu : {0.25, 1.0, 3.0}) CHECK(std::abs(excursion_law(nu, 1000).theta - 1.0) < 0.01);
  CHECK(excursion_law(50.0, 1000000).theta > 0.0);  // A and B underflow here
}

TEST_CASE("joint sampler marginals") {
  const auto law = excursion_law(0.5, 5);
  lab::RngStream rng(2, 0);
  const int n = 100000;
  std::vector<double> eta(n), single;
  std::vector<std::uint64_t> xi(n);
  for (int i = 0; i < n; ++i) {
    const auto s = sample_joint_local_time(law, rng);
    xi[i] = s.xi;
    eta[i] = s.eta;
    if (s.xi == 1) single.push_back(s.eta);
  }
  const auto sm = lab::summarize(eta);
  CHECK(std::abs(sm.mean - 10.0) < 3.0 * sm.std_error);
  const boost::math::exponential_distribution<> e10(0.1), e1(1.0 / law.theta);
  CHECK(lab::ks_one_sample(eta, [&](double x) { return boost::math::cdf(e10, x); }).p_value > 0.01);
  CHECK(lab::chi_square_geometric(xi, law.p_star).p_value > 0.01);
  // Given ξ = 1, η is a single Exponential(θ).
  CHECK(lab::ks_one_sample(single, [&](double x) { return boost::math::cdf(e1, x); }).p_value > 0.01);
}

TEST_CASE("E|xi - eta| at R = 2 matches the Gamma mean absolute deviation") {
  // ν = 1/2, R = 2: θ = 1, p* = 1/4; E|k - Gamma(k, 1)| = 2 k^k e^{-k} / Γ(k).
  double want = 0.0;
  for (int k = 1; k < 600; ++k)
    want += 0.25 * std::pow(0.75, k - 1) * 2.0 * std::exp(k * std::log(double(k)) - k - std::lgamma(double(k)));
  const auto rows = discrepancy_profile(0.5, {2}, 1000000, 3);
  REQUIRE(rows.size() == 1);
  // Standard error from a pilot: sd of |ξ - η| is about 1.3 here.
  CHECK(std::abs(rows[0].mean - want) < 3.0 * 1.5 / std::sqrt(1e6));
  CHECK(rows[0].mean > 0.0);
}

TEST_CASE("scaled 99% quantile decreases over the top decade") {
  const auto grid = log_grid(1000, 10000, 8);
  const auto rows = discrepancy_profile(0.5, grid, 20000, 4);
  std::vector<double> r, q;
  for (const auto& row : rows) {
    r.push_back(double(row.R));
    q.push_back(row.scaled_q99);
    CHECK(row.q50 <= row.q99);
  }
  CHECK(lab::spearman(r, q) <= 0.0);
}

TEST_CASE("log grid") {
  const auto g = log_grid(100, 10000, 4);
  CHECK(g.front() == 100);
  CHECK(g.back() == 10000);
  CHECK(g.size() == 9);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  const auto dense = log_grid(2, 5, 100);
  CHECK(dense == std::vector<Level>{2, 3, 4, 5});
}

TEST_CASE("profile is reproducible") {
  const auto a = discrepancy_profile(1.0, {10, 100}, 5000, 9);
  const auto b = discrepancy_profile(1.0, {10, 100}, 5000, 9);
  CHECK(a[1].mean == b[1].mean);
  CHECK(a[0].q99 == b[0].q99);
}

}
