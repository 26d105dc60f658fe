#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"

#include "bwlab/errors.hpp"
#include "bwlab/specfun.hpp"

using namespace bwlab::specfun;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Power series of I_ν in extended precision.
long double series_i(long double nu, long double x, int terms = 60) {
  long double term = std::pow(x / 2, nu) / std::tgamma(nu + 1);
  long double sum = term;
  for (int k = 1; k < terms; ++k) {
    term *= (x * x / 4) / (k * (k + nu));
    sum += term;
  }
  return sum;
}

// E_x τ(a,b) from u = -y²/d + c1 + c2 y^{-2ν}, u(a) = u(b) = 0.
long double exit_time_ode(long double nu, long double a, long double x, long double b) {
  const long double d = 2 * nu + 2;
  const long double pa = std::pow(a, -2 * nu), pb = std::pow(b, -2 * nu);
  const long double c2 = (a * a - b * b) / d / (pa - pb);
  const long double c1 = a * a / d - c2 * pa;
  return -x * x / d + c1 + c2 * std::pow(x, -2 * nu);
}

// E_x e^{-ατ}: u'' + (2ν+1)/y u' = 2αu on (a,b), u(a) = u(b) = 1, by RK4
// shooting with two basis solutions from a.
double exit_laplace_ode(double nu, double a, double x, double b, double alpha) {
  const int steps = 20000;
  auto run = [&](long double u0, long double v0, long double upto) {
    long double y = a, u = u0, v = v0;
    const long double h = (upto - a) / steps;
    auto f = [&](long double yy, long double uu, long double vv, long double& du, long double& dv) {
      du = vv;
      dv = 2 * alpha * uu - (2 * nu + 1) / yy * vv;
    };
    for (int i = 0; i < steps; ++i) {
      long double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      f(y, u, v, k1u, k1v);
      f(y + h / 2, u + h / 2 * k1u, v + h / 2 * k1v, k2u, k2v);
      f(y + h / 2, u + h / 2 * k2u, v + h / 2 * k2v, k3u, k3v);
      f(y + h, u + h * k3u, v + h * k3v, k4u, k4v);
      u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      y += h;
    }
    return u;
  };
  // u = phi1 + c phi2 with phi1(a) = 1, phi1'(a) = 0, phi2(a) = 0, phi2'(a) = 1.
  const long double c = (1 - run(1, 0, b)) / run(0, 1, b);
  return static_cast<double>(run(1, 0, x) + c * run(0, 1, x));
}

}  // namespace

TEST_SUITE("specfun") {

TEST_CASE("I at half order matches the hyperbolic closed form") {
  for (double x : {1e-3, 0.1, 1.0, 2.0, 7.5, 15.0, 40.0, 200.0}) {
    const double want = std::sqrt(2.0 / (std::numbers::pi * x)) * std::sinh(x);
    CHECK(rel(bessel_i(0.5, x), want) < 1e-12);
  }
  CHECK(rel(bessel_i(0.5, 1.0), 0.937674888245488) < 1e-12);
}

TEST_CASE("I of order zero tends to one at the origin") {
  CHECK(bessel_i(0.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("I of order one at 2 matches the extended-precision series") {
  const double want = static_cast<double>(series_i(1.0L, 2.0L));
  CHECK(rel(bessel_i(1.0, 2.0), want) < 1e-13);
  CHECK(rel(bessel_i(1.0, 2.0), 1.590636854637329) < 1e-12);
}

TEST_CASE("K at half order matches the exponential closed form") {
  for (double x : {1e-3, 0.5, 1.0, 2.0, 3.0, 10.0, 80.0, 600.0}) {
    const double want = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    CHECK(rel(bessel_k(0.5, x), want) < 1e-12);
  }
  CHECK(rel(bessel_k(0.5, 1.0), 0.461068504447895) < 1e-12);
  CHECK(rel(bessel_k(0.5, 2.0), 0.119937771968061) < 1e-12);
}

TEST_CASE("I and K agree with an independent library over a grid") {
  for (double nu : {0.0, 0.25, 0.5, 1.0, 1.7, 2.0, 5.5, 12.0})
    for (double x : {0.01, 0.3, 1.0, 1.99, 2.01, 6.0, 10.5, 25.0, 90.0, 400.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(bessel_i(nu, x), boost::math::cyl_bessel_i(nu, x)) < 1e-11);
      CHECK(rel(bessel_k(nu, x), boost::math::cyl_bessel_k(nu, x)) < 1e-11);
    }
}

TEST_CASE("reflection route agrees with the direct K for moderate arguments") {
  for (double nu : {0.3, 0.5, 1.0, 2.0, 2.6})
    for (double x : {0.2, 1.0, 3.0, 5.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(bessel_k_reflection(nu, x), bessel_k(nu, x)) < 1e-7);
    }
}

TEST_CASE("Wronskian I K' - I' K = -1/x") {
  // I'_ν = I_{ν+1} + (ν/x) I_ν, K'_ν = -K_{ν+1} + (ν/x) K_ν.
  for (double nu : {0.25, 1.0, 3.5})
    for (double x : {0.5, 4.0, 30.0}) {
      const double i = bessel_i(nu, x), k = bessel_k(nu, x);
      const double w = -i * bessel_k(nu + 1, x) - bessel_i(nu + 1, x) * k;
      CHECK(rel(w, -1.0 / x) < 1e-12);
    }
}

TEST_CASE("S vanishes on the diagonal and reduces to sinh at half order") {
  CHECK(s_nu(1.3, 2.0, 2.0) == 0.0);
  CHECK(rel(s_nu(0.5, 2.0, 1.0), std::sinh(1.0) / 2.0) < 1e-12);
  for (double u : {0.5, 3.0, 20.0})
    for (double v : {0.7, 4.0, 21.0})
      if (u != v) CHECK(rel(s_nu(0.5, u, v), std::sinh(u - v) / (u * v)) < 1e-10);
}

TEST_CASE("log_pow_diff is accurate near w = u and at infinity") {
  CHECK(rel(log_pow_diff(2.0, 3.0, 1.0), std::log(1.0 / 2 - 1.0 / 3)) < 1e-14);
  CHECK(rel(log_pow_diff(1e6, 1e6 + 1, 1.0), -std::log(1e6) - std::log(1e6 + 1)) < 1e-12);
  CHECK(rel(log_pow_diff(5.0, std::numeric_limits<double>::infinity(), 2.0), -2.0 * std::log(5.0)) < 1e-14);
}

TEST_CASE("hitting probability") {
  const BesselOrder half(0.5);
  // x^{-1} = 1/2, b^{-1} = 1/3, a^{-1} = 1: (1/2 - 1/3)/(1 - 1/3) = 1/4.
  CHECK(hitting_probability(half, Interval(1.0, 2.0, 3.0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hitting_probability(BesselOrder(1.0), Interval(1.0, 1.0, 3.0)) == 1.0);
  CHECK(hitting_probability(BesselOrder(0.8), Interval(1.0, 1.0 + 1e-12, 3.0)) > 1.0 - 1e-10);
  for (double nu : {0.25, 1.0, 3.0}) {
    const double want = std::pow(2.0 / 7.0, 2.0 * nu);
    CHECK(rel(hitting_probability(BesselOrder(nu), Interval(2.0, 7.0, std::numeric_limits<double>::infinity())),
              want) < 1e-14);
  }
}

TEST_CASE("expected exit time") {
  CHECK(expected_exit_time(BesselOrder(1.0), Interval(1.0, 1.0, 3.0)) == 0.0);
  const BesselOrder half(0.5);
  for (int R = 2; R <= 200; ++R)
    CHECK(rel(expected_exit_time(half, Interval(R - 1.0, R, R + 1.0)), 1.0) < 1e-10);
  for (double nu : {0.1, 0.5, 1.0, 2.0, 6.0})
    for (auto [a, x, b] : {std::tuple{1.0, 2.0, 3.0}, std::tuple{0.5, 0.6, 9.0}, std::tuple{99.0, 100.0, 101.0}}) {
      CAPTURE(nu);
      CAPTURE(a);
      const double want = static_cast<double>(exit_time_ode(nu, a, x, b));
      CHECK(rel(expected_exit_time(BesselOrder(nu), Interval(a, x, b)), want) < 1e-9);
    }
}

TEST_CASE("exit Laplace transform") {
  CHECK(exit_laplace(BesselOrder(1.0), Interval(1.0, 2.0, 3.0), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  const double want = 2.0 * std::sinh(1.0) / std::sinh(2.0);
  CHECK(rel(exit_laplace(BesselOrder(0.5), Interval(1.0, 2.0, 3.0), 0.5), want) < 1e-12);
  CHECK(rel(want, 1.0 / std::cosh(1.0)) < 1e-15);
  for (double nu : {0.25, 1.0, 2.5})
    for (double alpha : {0.1, 0.7, 3.0}) {
      CAPTURE(nu);
      CAPTURE(alpha);
      CHECK(rel(exit_laplace(BesselOrder(nu), Interval(1.0, 1.8, 3.0), alpha),
                exit_laplace_ode(nu, 1.0, 1.8, 3.0, alpha)) < 1e-9);
    }
}

TEST_CASE("domain checks") {
  CHECK_THROWS_AS(BesselOrder(0.0), bwlab::DomainError);
  CHECK_THROWS_AS(Interval(2.0, 1.0, 3.0), bwlab::DomainError);
  CHECK_THROWS_AS(expected_exit_time(BesselOrder(1.0), Interval(1.0, 2.0, std::numeric_limits<double>::infinity())),
                  bwlab::DomainError);
}

}
