#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>

#include "doctest.h"

#include "bwlab/besselsim.hpp"
#include "bwlab/errors.hpp"
#include "bwlab/lab/rng.hpp"
#include "bwlab/lab/stats.hpp"
#include "bwlab/specfun.hpp"

using namespace bwlab;
using namespace bwlab::besselsim;
using specfun::BesselOrder;
using specfun::Interval;

TEST_SUITE("besselsim") {

TEST_CASE("Y(1)^2 from 0 at half order is chi-square with 3 degrees of freedom") {
  lab::RngStream rng(1, 0);
  std::vector<double> v(100000);
  for (auto& x : v) {
    const double y = exact_step(0.5, 0.0, 1.0, rng);
    x = y * y;
  }
  const boost::math::chi_squared chi3(3.0);
  CHECK(lab::ks_one_sample(v, [&](double x) { return boost::math::cdf(chi3, x); }).p_value > 0.01);
}

TEST_CASE("E Y(t)^2 = y0^2 + d t along simulated paths") {
  const BesselOrder order(1.0);
  Scheme s;
  s.fine_dt = 0.05;
  std::vector<double> v;
  for (int i = 0; i < 20000; ++i) {
    lab::RngStream rng(2, std::uint64_t(i));
    const auto p = simulate_bessel(order, 1.5, s, rng, 2.0);
    v.push_back(p.y.back() * p.y.back());
  }
  const auto sm = lab::summarize(v);
  CHECK(std::abs(sm.mean - (4.0 + 4.0 * 1.5)) < 3.0 * sm.std_error);
}

TEST_CASE("empty horizon gives a constant path") {
  lab::RngStream rng(3, 0);
  const auto p = simulate_bessel(BesselOrder(0.5), 0.0, Scheme{}, rng);
  CHECK(p.t.size() == 1);
  CHECK(p.y[0] == 0.0);
  CHECK(p.future_infimum.has_value());
}

TEST_CASE("paths are reproducible and stay nonnegative") {
  Scheme s;
  s.fine_dt = 0.01;
  lab::RngStream a(4, 1), b(4, 1);
  const auto pa = simulate_bessel(BesselOrder(0.25), 20.0, s, a);
  const auto pb = simulate_bessel(BesselOrder(0.25), 20.0, s, b);
  CHECK(pa.y == pb.y);
  CHECK(*std::min_element(pa.y.begin(), pa.y.end()) >= 0.0);
}

TEST_CASE("scheme validation") {
  Scheme s;
  s.fine_dt = 2.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = Scheme{};
  s.proximity = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("exit side frequencies follow the hitting probability") {
  const Scheme s;
  struct Case { double nu, a, x, b; };
  for (Case c : {Case{0.5, 1, 2, 3}, Case{1.0, 1, 2, 3}, Case{0.25, 4, 4.5, 6}, Case{2.0, 0.5, 1.0, 1.2}}) {
    lab::RngStream rng(5, std::uint64_t(c.nu * 100));
    const BesselOrder order(c.nu);
    const Interval iv(c.a, c.x, c.b);
    const int n = c.nu == 0.5 ? 100000 : 20000;
    int low = 0;
    for (int i = 0; i < n; ++i) low += sample_exit(order, iv, s, rng).side == Exit::Lower;
    const double p = specfun::hitting_probability(order, iv);
    CAPTURE(c.nu);
    CHECK(std::abs(low / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("mean exit times match the closed form") {
  const Scheme s;
  for (auto [nu, a, x, b] : {std::tuple{0.5, 4.0, 5.0, 6.0}, std::tuple{0.5, 19.0, 20.0, 21.0},
                             std::tuple{1.0, 1.0, 2.0, 3.0}}) {
    lab::RngStream rng(6, std::uint64_t(a));
    const BesselOrder order(nu);
    std::vector<double> t(200000);
    for (auto& v : t) v = sample_exit(order, Interval(a, x, b), s, rng).time;
    const auto sm = lab::summarize(t);
    CAPTURE(nu);
    CAPTURE(a);
    CHECK(std::abs(sm.mean - specfun::expected_exit_time(order, Interval(a, x, b))) < 3.0 * sm.std_error);
  }
}

TEST_CASE("start at the lower barrier exits immediately") {
  lab::RngStream rng(7, 0);
  const auto e = sample_exit(BesselOrder(1.0), Interval(1.0, 1.0, 2.0), Scheme{}, rng);
  CHECK(e.side == Exit::Lower);
  CHECK(e.time == 0.0);
}

TEST_CASE("bridge hitting time lies in the step and inverse Gaussian has its mean") {
  lab::RngStream rng(8, 0);
  for (int i = 0; i < 10000; ++i) {
    const double t = detail::bridge_hitting_time(0.3, 0.1, 0.5, rng);
    REQUIRE(t >= 0.0);
    REQUIRE(t <= 0.5);
  }
  std::vector<double> v(100000);
  for (auto& x : v) x = detail::inverse_gaussian(2.0, 3.0, rng);
  const auto sm = lab::summarize(v);
  CHECK(std::abs(sm.mean - 2.0) < 3.0 * sm.std_error);
  CHECK(sm.variance == doctest::Approx(8.0 / 3.0).epsilon(0.05));
}

TEST_CASE("band occupation") {
  CHECK(segment_time_in_band(0.0, 0.0, 1.0, 1.0, 0.25, 0.75) == doctest::Approx(0.5));
  CHECK(segment_time_in_band(0.0, 2.0, 1.0, 2.0, 0.0, 1.0) == 0.0);
  CHECK(segment_time_in_band(0.0, 0.5, 2.0, 0.5, 0.0, 1.0) == 2.0);
  BesselPath p;
  p.t = {0.0, 1.0, 2.0};
  p.y = {0.0, 0.4, 0.8};
  CHECK(occupation_local_time(p, 5.0, 0.05) == 0.0);
  // The path crosses (0.5, 0.7) at slope 0.4 per unit time: 0.5 time units in a band of width 0.2.
  CHECK(occupation_local_time(p, 0.6, 0.1) == doctest::Approx(0.5 / 0.2));
}

TEST_CASE("occupation local time at R = 5 has mean near R/nu and an exponential law") {
  const BesselOrder order(0.5);
  const Scheme s;
  const double f = occupation_bias_factor(0.5, 5.0, 0.05);
  lab::RngStream rng(9, 0);
  std::vector<double> v(4000);
  for (auto& x : v) x = sample_occupation_local_time(order, 5.0, 0.05, 10.0, s, rng) / f;
  const auto sm = lab::summarize(v);
  CHECK(std::abs(sm.mean - 10.0) < 0.05 * 10.0);
  const boost::math::exponential_distribution<> ex(0.1);
  CHECK(lab::ks_one_sample(v, [&](double x) { return boost::math::cdf(ex, x); }).p_value > 0.01);
}

TEST_CASE("derived continuous processes") {
  BesselPath mono;
  mono.t = {0.0, 1.0, 2.0, 3.0};
  mono.y = {0.0, 1.5, 2.5, 3.5};
  mono.future_infimum = 3.5;
  const auto d = derived_continuous(mono);
  CHECK(d.M == mono.y);
  CHECK(d.I == mono.y);

  Scheme s;
  s.fine_dt = 0.05;
  for (int i = 0; i < 1000; ++i) {
    lab::RngStream rng(10, std::uint64_t(i));
    const auto p = simulate_bessel(BesselOrder(0.5), 30.0, s, rng);
    const auto dc = derived_continuous(p);
    for (std::size_t k = 0; k < p.y.size(); ++k) {
      REQUIRE(dc.I[k] <= p.y[k]);
      REQUIRE(p.y[k] <= dc.M[k]);
    }
    // A(r) is the last grid time with Y <= r: I there is <= r, and > r just after.
    for (std::size_t l = 0; l < dc.levels.size(); ++l) {
      const auto idx = std::size_t(std::lround(dc.A[l] / s.fine_dt));
      REQUIRE(dc.I[idx] <= dc.levels[l]);
      const double next = idx + 1 < dc.I.size() ? dc.I[idx + 1] : *p.future_infimum;
      REQUIRE(next > dc.levels[l]);
    }
  }
  BesselPath bare;
  bare.t = {0.0};
  bare.y = {0.0};
  CHECK_THROWS_AS(derived_continuous(bare), CertificationError);
}

}
