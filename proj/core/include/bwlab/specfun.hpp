#pragma once

// Modified Bessel functions and the exact exit laws of a Bessel process from
// an interval (a, b).

namespace bwlab::specfun {

/// Order ν > 0 of a transient Bessel process; dimension d = 2ν + 2.
class BesselOrder {
 public:
  explicit BesselOrder(double nu);

  double nu() const { return nu_; }
  double dimension() const { return 2.0 * nu_ + 2.0; }

 private:
  double nu_;
};

/// Start point x inside barriers (a, b), 0 < a < x < b. `b` may be +inf for
/// hitting_probability only. The degenerate start x == a is accepted and
/// means immediate exit at the lower barrier.
class Interval {
 public:
  Interval(double a, double x, double b);

  double a() const { return a_; }
  double x() const { return x_; }
  double b() const { return b_; }
  bool at_lower() const { return x_ == a_; }

 private:
  double a_;
  double x_;
  double b_;
};

inline constexpr double kMaxArgument = 700.0;
inline constexpr double kMaxOrder = 100.0;

// Power series for x <= max(10, 2ν), continued fraction + Wronskian above.
double bessel_i(double nu, double x);
// Temme series (x <= 2) or Steed's continued fraction (x > 2) for the
// fractional part of ν, then upward recurrence. Integer orders need no limit.
double bessel_k(double nu, double x);

// K_ν via π/(2 sin νπ)(I_{-ν} - I_ν); at integer ν (or within 1e-3 of one)
// the ν-limit is taken by Richardson extrapolation of symmetric ν ± ε
// evaluations (ε = 1e-3, 5e-4). Only reliable for moderate x (cancellation
// of order e^{2x}); kept as an independent route for cross-checks.
double bessel_k_reflection(double nu, double x);

// S_ν(u, v) = (uv)^{-ν}(I_ν(u)K_ν(v) - K_ν(u)I_ν(v)).
double s_nu(double nu, double u, double v);

/// log(u^{-p} - w^{-p}) for 0 < u < w (w may be +inf), free of cancellation
/// for w/u close to 1 and of underflow for large u.
double log_pow_diff(double u, double w, double p);

// P_x(Y exits (a,b) at a) = (x^{-2ν} - b^{-2ν}) / (a^{-2ν} - b^{-2ν}).
double hitting_probability(const BesselOrder& order, const Interval& iv);

// E_x τ(a,b); b must be finite.
double expected_exit_time(const BesselOrder& order, const Interval& iv);

// E_x e^{-ατ(a,b)}, α >= 0.
double exit_laplace(const BesselOrder& order, const Interval& iv, double alpha);

}  // namespace bwlab::specfun
