#include "bwlab/besselsim.hpp"

#include <ostream>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"

namespace bwlab::besselsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void Scheme::validate() const {
  if (!(fine_dt > 0.0) || !(coarse_dt >= fine_dt) || !std::isfinite(coarse_dt))
    throw DomainError("scheme needs 0 < fine_dt <= coarse_dt < inf");
  if (!(proximity > 0.0) || !(band_proximity > 0.0))
    throw DomainError("scheme proximities must be positive");
}

double exact_step(double nu, double y, double h, lab::RngStream& rng) {
  const double m = y + std::sqrt(h) * rng.normal();
  const double c = rng.chi_square(2.0 * nu + 1.0);
  return std::sqrt(m * m + h * c);
}

namespace detail {

double inverse_gaussian(double mean, double shape, lab::RngStream& rng) {
  const double z = rng.normal();
  const double y = z * z;
  const double my = mean * y;
  const double x = mean + mean * my / (2.0 * shape) -
                   mean / (2.0 * shape) * std::sqrt(4.0 * shape * my + my * my);
  return rng.uniform() <= mean / (mean + x) ? x : mean * mean / x;
}

double bridge_hitting_time(double d0, double d1, double h, lab::RngStream& rng) {
  // With B(s) = ((h-s)/h) W(hs/(h-s)) + sD/h, the bridge hits d0 when W(u)
  // + (d1/h) u hits d0, an inverse-Gaussian time (Lévy when d1 = 0).
  double u;
  if (d1 > 0.0) {
    u = inverse_gaussian(d0 * h / d1, d0 * d0, rng);
  } else {
    const double z = rng.normal();
    u = d0 * d0 / (z * z);
  }
  return std::isfinite(u) ? h * u / (h + u) : h;
}

double first_crossing(double y0, double y1, double h, double a, double b, lab::RngStream& rng,
                      Exit& side) {
  const bool below = y1 <= a;
  const bool above = y1 >= b;
  const double pa = below ? 1.0 : (a > -kInf ? std::exp(-2.0 * (y0 - a) * (y1 - a) / h) : 0.0);
  const double pb = above ? 1.0 : (b < kInf ? std::exp(-2.0 * (b - y0) * (b - y1) / h) : 0.0);
  if (pa == 0.0 && pb == 0.0) return -1.0;
  const double p = pa + pb - pa * pb;
  const double u = (pa == 1.0 || pb == 1.0) ? 0.0 : rng.uniform();
  if (u >= p) return -1.0;
  if (u < pa && !(pb == 1.0 && pa < 1.0)) {
    side = Exit::Lower;
    return bridge_hitting_time(y0 - a, std::abs(y1 - a), h, rng);
  }
  side = Exit::Upper;
  return bridge_hitting_time(b - y0, std::abs(b - y1), h, rng);
}

}  // namespace detail

BesselStepper::BesselStepper(const specfun::BesselOrder& order, const Scheme& scheme, double y0,
                             double t0)
    : nu_(order.nu()), scheme_(scheme), y_(y0), t_(t0) {
  scheme_.validate();
  if (!(y0 >= 0.0) || !std::isfinite(y0)) throw DomainError("start value must be finite and >= 0");
}

double BesselStepper::step_size(double a, double b, double t_stop) const {
  double r = kInf;
  if (a > -kInf) r = std::min(r, (y_ - a) / scheme_.proximity);
  if (b < kInf) r = std::min(r, (b - y_) / scheme_.proximity);
  if (!std::isnan(focus_lo_)) {
    if (y_ < focus_lo_) r = std::min(r, (focus_lo_ - y_) / scheme_.band_proximity);
    else if (y_ > focus_hi_) r = std::min(r, (y_ - focus_hi_) / scheme_.band_proximity);
    else r = 0.0;
  }
  double h = std::clamp(r * r, scheme_.fine_dt, scheme_.coarse_dt);
  if (t_stop - t_ < h) h = t_stop - t_;
  return h;
}

BesselPath simulate_bessel(const specfun::BesselOrder& order, double t_max, const Scheme& scheme,
                           lab::RngStream& rng, double y0) {
  scheme.validate();
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be finite and >= 0");
  if (!(y0 >= 0.0)) throw DomainError("start value must be >= 0");
  BesselPath path;
  path.nu = order.nu();
  path.scheme = scheme;
  path.seed = rng.seed_base();
  path.stream = rng.stream_index();
  const auto n = static_cast<std::size_t>(std::llround(t_max / scheme.fine_dt));
  path.t.reserve(n + 1);
  path.y.reserve(n + 1);
  path.t.push_back(0.0);
  path.y.push_back(y0);
  double y = y0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = (i == n) ? t_max : static_cast<double>(i) * scheme.fine_dt;
    y = exact_step(path.nu, y, t - path.t.back(), rng);
    path.t.push_back(t);
    path.y.push_back(y);
  }
  path.future_infimum = sample_future_infimum(path.nu, y, rng);
  return path;
}

ExitSample sample_exit(const specfun::BesselOrder& order, const specfun::Interval& iv,
                       const Scheme& scheme, lab::RngStream& rng) {
  if (iv.at_lower()) return {Exit::Lower, 0.0};
  if (!std::isfinite(iv.b())) throw DomainError("exit sampling needs a finite upper barrier");
  BesselStepper s(order, scheme, iv.x());
  const Exit side = s.advance(iv.a(), iv.b(), kInf, rng);
  return {side, s.t()};
}

double sample_future_infimum(double nu, double y, lab::RngStream& rng) {
  if (y <= 0.0) return 0.0;
  return y * std::exp(std::log(rng.uniform()) / (2.0 * nu));
}

double segment_time_in_band(double t0, double y0, double t1, double y1, double lo, double hi) {
  const double dt = t1 - t0;
  if (y0 == y1) return (y0 >= lo && y0 <= hi) ? dt : 0.0;
  double s0 = (lo - y0) / (y1 - y0);
  double s1 = (hi - y0) / (y1 - y0);
  if (s0 > s1) std::swap(s0, s1);
  const double len = std::min(s1, 1.0) - std::max(s0, 0.0);
  return len > 0.0 ? len * dt : 0.0;
}

double occupation_local_time(const BesselPath& path, double R, double eps) {
  if (!(eps > 0.0)) throw DomainError("band half-width must be positive");
  if (eps < std::sqrt(path.scheme.fine_dt)) throw DomainError("band below path resolution");
  double occ = 0.0;
  for (std::size_t i = 1; i < path.t.size(); ++i)
    occ += segment_time_in_band(path.t[i - 1], path.y[i - 1], path.t[i], path.y[i], R - eps, R + eps);
  return occ / (2.0 * eps);
}

double sample_occupation_local_time(const specfun::BesselOrder& order, double R, double eps,
                                    double splice_level, const Scheme& scheme, lab::RngStream& rng) {
  if (!(eps > 0.0) || !(R > eps)) throw DomainError("need 0 < eps < R");
  if (!(splice_level > R + eps)) throw DomainError("splice level must lie above the band");
  const double lo = R - eps, hi = R + eps;
  const double back = std::exp(2.0 * order.nu() * std::log(hi / splice_level));
  BesselStepper s(order, scheme, R);
  s.set_focus(lo, hi);
  double occ = 0.0;
  auto observe = [&](double t0, double y0, double t1, double y1) {
    if ((y0 < lo && y1 < lo) || (y0 > hi && y1 > hi)) return;
    occ += segment_time_in_band(t0, y0, t1, y1, lo, hi);
  };
  for (;;) {
    s.advance(-kInf, splice_level, kInf, rng, observe);
    if (!(rng.uniform() < back)) break;
    s.place(hi);
  }
  return occ / (2.0 * eps);
}

double occupation_bias_factor(double nu, double R, double eps) {
  if (!(nu > 0.0) || !(eps > 0.0) || !(R > eps)) throw DomainError("need nu > 0, 0 < eps < R");
  // Mean local time at y from a start at R: (y/ν)(y/R)^{2ν} below R, y/ν above.
  const double k = 2.0 * nu + 2.0;
  const double below = R * R * (1.0 - std::pow((R - eps) / R, k)) / (k * nu);
  const double above = ((R + eps) * (R + eps) - R * R) / (2.0 * nu);
  return (below + above) / (2.0 * eps) * nu / R;
}

DerivedContinuous derived_continuous(const BesselPath& path) {
  if (!path.future_infimum) throw CertificationError("future infimum after the path end is unknown");
  const std::size_t n = path.y.size();
  DerivedContinuous d;
  d.M.resize(n);
  d.I.resize(n);
  double m = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, path.y[i]);
    d.M[i] = m;
  }
  double inf = *path.future_infimum;
  for (std::size_t i = n; i-- > 0;) {
    inf = std::min(inf, path.y[i]);
    d.I[i] = inf;
  }
  for (double r = 1.0; r < *path.future_infimum; r += 1.0) {
    // I is non-decreasing: the last grid index with I <= r is the last time Y <= r.
    const auto it = std::upper_bound(d.I.begin(), d.I.end(), r);
    if (it == d.I.begin()) continue;
    d.levels.push_back(r);
    d.A.push_back(path.t[static_cast<std::size_t>(it - d.I.begin()) - 1]);
  }
  return d;
}

void write_path_csv(std::ostream& os, const BesselPath& path) {
  lab::CsvWriter w(os, {"time", "value"});
  for (std::size_t i = 0; i < path.t.size(); ++i) {
    w.cell(path.t[i]).cell(path.y[i]);
    w.row_end();
  }
}

}  // namespace bwlab::besselsim
