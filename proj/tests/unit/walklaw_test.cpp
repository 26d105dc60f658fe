#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/rational.hpp>

#include "doctest.h"

#include "bwlab/errors.hpp"
#include "bwlab/lab/rng.hpp"
#include "bwlab/walklaw.hpp"

using namespace bwlab::walklaw;
using Q = boost::rational<long long>;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }
double to_d(Q q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

// p_R for integer 2ν in exact rationals: x^{-2ν} with 2ν = e.
Q p_rational(int e, long long R) {
  auto pw = [e](long long x) {
    long long d = 1;
    for (int i = 0; i < e; ++i) d *= x;
    return Q(1, d);
  };
  return (pw(R - 1) - pw(R)) / (pw(R - 1) - pw(R + 1)) - Q(1, 2);
}

// p_R in 50-digit arithmetic for any ν.
Big p_big(double nu, long long R) {
  const Big e = 2 * Big(nu);
  const Big a = pow(Big(R - 1), -e), m = pow(Big(R), -e), b = pow(Big(R + 1), -e);
  return (a - m) / (a - b) - Big(0.5);
}

}  // namespace

TEST_SUITE("walklaw") {

TEST_CASE("Bessel-derived p_R") {
  // p_R is a ratio of differences; cancellation costs about log10(R) digits.
  for (long long R = 2; R <= 300; ++R) CHECK(rel(p_bessel(0.5, R), to_d(p_rational(1, R))) < 1e-13);
  CHECK(p_bessel(0.5, 2) == 0.25);
  CHECK(rel(p_bessel(1.0, 2), 11.0 / 32.0) < 1e-15);
  CHECK(to_d(p_rational(2, 2)) == 11.0 / 32.0);
  CHECK(p_bessel(0.7, 0) == 0.5);
  CHECK(p_bessel(0.7, 1) == 0.5);
  for (double nu : {0.1, 0.75, 2.0, 9.0})
    for (long long R : {2LL, 3LL, 17LL, 1000LL, 100000LL, 10000000LL}) {
      CAPTURE(nu);
      CAPTURE(R);
      CHECK(rel(p_bessel(nu, R), static_cast<double>(p_big(nu, R))) < 1e-12);
    }
}

TEST_CASE("p_R is (2nu+1)/(4R) to second order") {
  for (double nu : {0.25, 1.0, 2.0}) {
    double worst = 0.0;
    for (long long R = 10; R <= 100000; R = R * 3 / 2) {
      const double d = std::abs(p_bessel(nu, R) - (2 * nu + 1) / (4.0 * R));
      worst = std::max(worst, d * double(R) * double(R));
      if (R > 10000) CHECK(d * double(R) < 1e-4);
    }
    CAPTURE(nu);
    CHECK(worst < 2.0);
  }
}

TEST_CASE("U ratio edge values") {
  CHECK(u_ratio(WalkLaw::constant(0.0), 5) == 1.0);
  CHECK(u_ratio(WalkLaw::constant(0.5), 5) == 0.0);
  CHECK(u_ratio(WalkLaw::bessel(1.0), 1) == 0.0);
}

TEST_CASE("product of U telescopes to A_{k+1}/A_2") {
  for (double nu : {0.5, 1.3}) {
    const WalkLaw law = WalkLaw::bessel(nu);
    const double a2 = band_differences(nu, 2).a;
    double logprod = 0.0;
    for (Level k = 2; k <= 5000; ++k) {
      logprod += law.log_u(k);
      if (k % 500 == 0) CHECK(rel(std::exp(logprod), band_differences(nu, k + 1).a / a2) < 1e-10);
    }
  }
}

TEST_CASE("band differences") {
  const auto d = band_differences(1.0, 2);
  CHECK(rel(d.a, 3.0 / 4.0) < 1e-15);
  CHECK(rel(d.b, 5.0 / 36.0) < 1e-15);
  CHECK_THROWS_AS(band_differences(1.0, 1), bwlab::DomainError);
}

TEST_CASE("transience classification") {
  CHECK(is_transient(WalkLaw::constant(0.0)).verdict == Transience::Recurrent);
  CHECK(is_transient(WalkLaw::power(2.0, 2.0, 0.0)).verdict == Transience::Transient);
  CHECK(is_transient(WalkLaw::power(0.5, 2.0, 0.0)).verdict == Transience::Recurrent);
  CHECK(is_transient(WalkLaw::power(1.0, 2.0, 0.0)).verdict == Transience::Inconclusive);
  CHECK(is_transient(WalkLaw::constant(0.1)).verdict == Transience::Transient);
  const auto v = is_transient(WalkLaw::bessel(0.5));
  CHECK(v.verdict == Transience::Transient);
  // ν = 1/2: the products are A_{k+1}/A_2 = 2/(k(k+1)), decay exponent 2.
  CHECK(v.decay_exponent == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("D(R, inf)") {
  CHECK(rel(d_tail_bessel_closed(0.5, 2), 3.0) < 1e-14);
  CHECK(rel(d_tail(WalkLaw::bessel(0.5), 2), 3.0) < 1e-9);
  CHECK(rel(d_tail_bessel_closed(1.0, 2), 9.0 / 5.0) < 1e-14);
  CHECK(rel(d_tail(WalkLaw::bessel(1.0), 2), 9.0 / 5.0) < 1e-9);
  CHECK(d_tail(WalkLaw::constant(0.5), 4) == 1.0);
  CHECK(rel(d_tail(WalkLaw::bessel(0.75), 7), d_tail_bessel_closed(0.75, 7)) < 1e-8);
  CHECK_THROWS_AS(d_tail(WalkLaw::constant(0.0), 3), bwlab::ConvergenceError);
}

TEST_CASE("local time law") {
  CHECK(rel(local_time_law(WalkLaw::bessel(0.5), 5).p_star, 0.1) < 1e-14);
  CHECK(rel(local_time_law(WalkLaw::bessel(1.0), 2).p_star, 15.0 / 32.0) < 1e-14);
  // (1/2 + p_2)/D = (1/2 + 11/32)/(9/5) = (27/32)(5/9) = 15/32.
  CHECK(to_d((Q(1, 2) + p_rational(2, 2)) / Q(9, 5)) == 15.0 / 32.0);
  for (double nu : {0.5, 1.0, 2.0})
    for (Level R : {1000, 10000}) {
      const double ratio = local_time_law(WalkLaw::bessel(nu), R).p_star * double(R) / nu;
      CHECK(std::abs(ratio - 1.0) < 0.02);
    }
  const LocalTimeLaw g = local_time_law(WalkLaw::bessel(1.0), 3);
  double s = 0.0;
  for (std::uint64_t k = 1; k < 2000; ++k) s += g.pmf(k);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.pmf(0) == 0.0);
  CHECK(local_time_law(WalkLaw::constant(0.5), 5).p_star == 1.0);
  CHECK_THROWS_AS(local_time_law(WalkLaw::bessel(1.0), 1), bwlab::DomainError);
}

TEST_CASE("return probability") {
  CHECK(return_probability(WalkLaw::bessel(0.5), 7, 7) == 1.0);
  CHECK(rel(return_probability(WalkLaw::bessel(0.5), 40, 10), 0.25) < 1e-12);
  const WalkLaw law = WalkLaw::bessel(1.0);
  const ReturnTail closed(law, 100);
  const ReturnTail numeric(law, 100, true);
  CHECK(closed.closed_form());
  CHECK_FALSE(numeric.closed_form());
  for (auto [from, to] : {std::pair<Level, Level>{30, 10}, {99, 2}, {5, 4}}) {
    CHECK(rel(numeric.return_probability(from, to), closed.return_probability(from, to)) < 1e-9);
    CHECK(rel(closed.return_probability(from, to), std::pow(double(to) / double(from), 2.0)) < 1e-12);
  }
  CHECK(rel(numeric.d_tail(6), d_tail_bessel_closed(1.0, 6)) < 1e-9);
  // A power-family walk: the numeric table against direct summation.
  const WalkLaw pw = WalkLaw::power(3.0, 2.0, 0.0);
  const ReturnTail t(pw, 200);
  CHECK(rel(t.d_tail(5), d_tail(pw, 5)) < 1e-8);
}

TEST_CASE("future infimum sampler has the return-probability law") {
  const WalkLaw law = WalkLaw::bessel(1.0);
  const ReturnTail tail(law, 1);
  bwlab::lab::RngStream rng(11, 0);
  const int n = 40000;
  int below = 0;
  for (int i = 0; i < n; ++i)
    if (tail.sample_future_infimum(20, rng) <= 10) ++below;
  const double p = 0.25;  // (10/20)^{2ν}
  CHECK(std::abs(below / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("truncated chain") {
  const WalkLaw one = WalkLaw::bessel(1.0);
  CHECK(std::abs(truncated_chain_pstar(one, 2, 10000) - 15.0 / 32.0) < 1e-6);
  CHECK(std::abs(truncated_chain_oracle_auto(one, 2).p_star - 15.0 / 32.0) < 1e-7);
  // For ν = 1/2 the truncation error is about 1/(2N): N = 10^4 is not enough
  // for 1e-6, the auto variant is.
  const WalkLaw half = WalkLaw::bessel(0.5);
  CHECK(std::abs(truncated_chain_pstar(half, 5, 10000) - 0.1) > 1e-6);
  CHECK(std::abs(truncated_chain_oracle_auto(half, 5).p_star - 0.1) < 1e-6);
  CHECK(truncated_chain_pstar(WalkLaw::constant(0.5), 5, 100) == 1.0);
  const WalkLaw pw = WalkLaw::power(2.5, 2.0, 0.3, Perturbation::Alternating);
  CHECK(std::abs(truncated_chain_oracle_auto(pw, 4).p_star - local_time_law(pw, 4).p_star) < 1e-6);
}

TEST_CASE("law construction") {
  const WalkLaw t = WalkLaw::table({0.1, 0.2}, Explicit::Tail::Power, 3.0);
  CHECK(t.p(1) == 0.1);
  CHECK(t.p(2) == 0.2);
  CHECK(rel(t.p(10), 3.0 / 40.0) < 1e-15);
  CHECK(t.up_probability(0) == 1.0);
  const WalkLaw p = WalkLaw::power(2.0, 1.5, 1.0, Perturbation::Minus);
  CHECK(p.p(4) == doctest::Approx(0.0));
  CHECK(WalkLaw::power(2.0, 1.5, 1.0, Perturbation::Plus).p(1) == 0.5);  // clamped
  CHECK(p.p(100) == doctest::Approx(0.005 - 0.001));
  CHECK_THROWS_AS(WalkLaw::constant(0.6), bwlab::DomainError);
  CHECK_THROWS_AS(WalkLaw::bessel(0.0), bwlab::DomainError);
}

}
