#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "bwlab/lab/rng.hpp"
#include "bwlab/specfun.hpp"

namespace bwlab::besselsim {

/// Step control. Every step is an exact squared-Bessel transition, so grid
/// marginals are exact for any step size. Steps shrink near watched levels,
/// where a crossing inside a step is decided and timed as for the Brownian
/// bridge between the two endpoints.
struct Scheme {
  double coarse_dt = 1.0;  // Δ: largest step
  double fine_dt = 1e-3;   // δ: step floor near watched levels and inside focus bands
  double proximity = 2.0;  // k: a step from distance d to a watched level is <= (d/k)²
  double band_proximity = 8.0;  // same for the distance to a focus band

  void validate() const;
};

// Y(t + h) given Y(t) = y: Y'² = (y + √h Z)² + h χ²_{2ν+1}.
double exact_step(double nu, double y, double h, lab::RngStream& rng);

enum class Exit { None, Lower, Upper };

namespace detail {
// Michael-Schucany-Haas sampler.
double inverse_gaussian(double mean, double shape, lab::RngStream& rng);
// First time a Brownian bridge from 0 to d0 + d1 over [0, h] reaches d0 > 0.
double bridge_hitting_time(double d0, double d1, double h, lab::RngStream& rng);
// Offset in [0, h] of the first crossing of a or b by the Brownian bridge
// y0 -> y1 over [0, h], or -1; `side` receives the barrier hit.
double first_crossing(double y0, double y1, double h, double a, double b, lab::RngStream& rng,
                      Exit& side);
}  // namespace detail

/// Online simulator of Y_ν. Not copyable across threads; one per path.
class BesselStepper {
 public:
  BesselStepper(const specfun::BesselOrder& order, const Scheme& scheme, double y0 = 0.0,
                double t0 = 0.0);

  double t() const { return t_; }
  double y() const { return y_; }
  double nu() const { return nu_; }
  const Scheme& scheme() const { return scheme_; }

  // Steps are kept at the fine size inside [lo, hi] and shrink on approach.
  void set_focus(double lo, double hi) {
    focus_lo_ = lo;
    focus_hi_ = hi;
  }
  void clear_focus() { focus_lo_ = focus_hi_ = kNaN; }

  // Restart at a new position (same clock).
  void place(double y) { y_ = y; }

  /// Advances until the path leaves (a, b) (a = -inf / b = +inf disable a
  /// side) or reaches t_stop exactly. On exit y() is the barrier and t() the
  /// crossing time. `observe(t0, y0, t1, y1)` sees every accepted segment.
  template <class Observer>
  Exit advance(double a, double b, double t_stop, lab::RngStream& rng, Observer&& observe);

  Exit advance(double a, double b, double t_stop, lab::RngStream& rng) {
    return advance(a, b, t_stop, rng, [](double, double, double, double) {});
  }

 private:
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  double step_size(double a, double b, double t_stop) const;

  double nu_;
  Scheme scheme_;
  double y_;
  double t_;
  double focus_lo_ = kNaN;
  double focus_hi_ = kNaN;
};

template <class Observer>
Exit BesselStepper::advance(double a, double b, double t_stop, lab::RngStream& rng,
                            Observer&& observe) {
  if (y_ <= a) return Exit::Lower;
  if (y_ >= b) return Exit::Upper;
  while (t_ < t_stop) {
    const double h = step_size(a, b, t_stop);
    const double y1 = exact_step(nu_, y_, h, rng);
    Exit side = Exit::None;
    const double off = detail::first_crossing(y_, y1, h, a, b, rng, side);
    if (off >= 0.0) {
      const double yb = side == Exit::Lower ? a : b;
      observe(t_, y_, t_ + off, yb);
      t_ += off;
      y_ = yb;
      return side;
    }
    const double t1 = (t_stop - t_ <= h) ? t_stop : t_ + h;
    observe(t_, y_, t1, y1);
    t_ = t1;
    y_ = y1;
  }
  return Exit::None;
}

struct BesselPath {
  double nu = 0.0;
  Scheme scheme;
  std::vector<double> t;
  std::vector<double> y;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  // inf_{s >= t_end} Y(s), drawn exactly as y_end · U^{1/(2ν)}.
  std::optional<double> future_infimum;
};

/// Path on the uniform grid of step scheme.fine_dt up to t_max (exact
/// transitions at every grid point, so in particular at multiples of Δ).
BesselPath simulate_bessel(const specfun::BesselOrder& order, double t_max, const Scheme& scheme,
                           lab::RngStream& rng, double y0 = 0.0);

struct ExitSample {
  Exit side = Exit::None;
  double time = 0.0;
};

ExitSample sample_exit(const specfun::BesselOrder& order, const specfun::Interval& iv,
                       const Scheme& scheme, lab::RngStream& rng);

// Exact draw of inf_{s >= 0} Y(s) started from y.
double sample_future_infimum(double nu, double y, lab::RngStream& rng);

/// (1 / 2ε) · time the linearly interpolated path spends in (R - ε, R + ε).
double occupation_local_time(const BesselPath& path, double R, double eps);

// Time the segment (t0, y0) -> (t1, y1), linearly interpolated, spends in [lo, hi].
double segment_time_in_band(double t0, double y0, double t1, double y1, double lo, double hi);

/// η(R, ∞) by band occupation, started at R (its first hit). On reaching
/// splice_level the path returns to R + ε with the exact probability
/// ((R + ε)/L)^{2ν} and continues, otherwise it has escaped.
double sample_occupation_local_time(const specfun::BesselOrder& order, double R, double eps,
                                    double splice_level, const Scheme& scheme, lab::RngStream& rng);

// E[band occupation / 2ε] divided by E η(R, ∞) = R/ν for a start at R.
double occupation_bias_factor(double nu, double R, double eps);

struct DerivedContinuous {
  std::vector<double> M;  // running max at grid times
  std::vector<double> I;  // future infimum at grid times
  std::vector<double> levels;
  std::vector<double> A;  // A(r) = sup{s : Y(s) <= r} (grid resolution), r in `levels`
};

// A is tabulated at integer levels below the future infimum.
DerivedContinuous derived_continuous(const BesselPath& path);

void write_path_csv(std::ostream& os, const BesselPath& path);

}  // namespace bwlab::besselsim
