#include "bwlab/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bwlab/errors.hpp"

namespace bwlab::specfun {

namespace {

constexpr double kEps = 1e-16;
constexpr double kFpMin = 1e-300;
constexpr int kMaxIter = 100000;
constexpr double kTemmeCutoff = 2.0;

// Coefficients d_j of 1/Γ(1+z) = Σ d_j z^j (Abramowitz & Stegun 6.1.34, shifted).
constexpr std::array<double, 26> kRecipGamma = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

struct TemmeGammas {
  double gam1;   // (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)
  double gam2;   // (1/Γ(1-μ) + 1/Γ(1+μ)) / 2
  double gampl;  // 1/Γ(1+μ)
  double gammi;  // 1/Γ(1-μ)
};

TemmeGammas temme_gammas(double mu) {
  double odd = 0.0;   // Σ_{j odd} d_j μ^{j-1}
  double even = 0.0;  // Σ_{j even} d_j μ^j
  for (std::size_t j = kRecipGamma.size(); j-- > 0;) {
    if (j % 2 == 1) {
      odd = odd * mu * mu + kRecipGamma[j];
    } else {
      even = even * mu * mu + kRecipGamma[j];
    }
  }
  TemmeGammas g{};
  g.gam1 = -odd;
  g.gam2 = even;
  g.gampl = even + mu * odd;
  g.gammi = even - mu * odd;
  return g;
}

void check_args(double nu, double x, const char* fn) {
  if (!(x > 0.0) || !(x < kMaxArgument)) {
    throw DomainError(std::string(fn) + ": x must lie in (0, 700)");
  }
  if (!(nu >= 0.0) || nu > kMaxOrder) {
    throw DomainError(std::string(fn) + ": order must lie in [0, 100]");
  }
}

struct IK {
  double i;  // I_ν(x) · e^{-x} when scaled
  double k;  // K_ν(x) · e^{x} when scaled
};

// Joint I_ν, K_ν (Temme / Steed / CF1 + Wronskian); both outputs exponentially
// scaled, I by e^{-x} and K by e^{x}.
IK bessel_ik_scaled(double nu, double x) {
  const int nl = static_cast<int>(nu + 0.5);
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  // CF1: f = I'_ν / I_ν (modified Lentz)
  double h = std::max(nu * xi, kFpMin);
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int it = 0;
  for (it = 1; it <= kMaxIter; ++it) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (it > kMaxIter) throw ConvergenceError("bessel: CF1 did not converge");

  // downward recurrence of unnormalised I from ν to μ
  double ril = kFpMin;
  double ripl = h * ril;
  double ril1 = ril;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
    if (std::abs(ril) > 1e200) {
      ril *= 1e-200;
      ripl *= 1e-200;
      ril1 *= 1e-200;
    }
  }
  const double f = ripl / ril;

  double rkmu = 0.0;  // K_μ e^{x}
  double rk1 = 0.0;   // K_{μ+1} e^{x}
  if (x < kTemmeCutoff) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * xmu;
    const double fct = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    d = -std::log(x2);
    double e = xmu * d;
    const double fct2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(xmu);
    double ff = fct * (g.gam1 * std::cosh(e) + g.gam2 * fct2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (it = 1; it <= kMaxIter; ++it) {
      const double di = it;
      ff = (di * ff + p + q) / (di * di - xmu2);
      c *= d / di;
      p /= di - xmu;
      q /= di + xmu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (it > kMaxIter) throw ConvergenceError("bessel: Temme series did not converge");
    const double ex = std::exp(x);
    rkmu = sum * ex;
    rk1 = sum1 * xi2 * ex;
  } else {
    b = 2.0 * (1.0 + x);
    d = 1.0 / b;
    double delh = d;
    h = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - xmu2;
    double q = a1;
    c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (it = 2; it <= kMaxIter; ++it) {
      a -= 2.0 * (it - 1);
      c = -a * c / it;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (it > kMaxIter) throw ConvergenceError("bessel: Steed CF2 did not converge");
    h = a1 * h;
    rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
  }

  const double rkmup = xmu * xi * rkmu - rk1;
  // Wronskian: I_μ K'_μ - I'_μ K_μ = -1/x; with K scaled by e^{x}, I comes out scaled by e^{-x}
  const double rimu = xi / (f * rkmu - rkmup);
  IK out{};
  out.i = rimu * ril1 / ril;
  for (int i = 1; i <= nl; ++i) {
    const double rktemp = (xmu + i) * xi2 * rk1 + rkmu;
    rkmu = rk1;
    rk1 = rktemp;
  }
  out.k = rkmu;
  return out;
}

// Power series of I_ν(x), all terms positive.
double bessel_i_series(double nu, double x) {
  const double log_t0 = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0);
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < kMaxIter; ++k) {
    term *= q / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    if (term < sum * kEps) return std::exp(log_t0 + std::log(sum));
  }
  throw ConvergenceError("bessel_i: power series did not converge");
}

// Series of I_{-ν} for non-integer ν (1/Γ evaluated through std::tgamma).
double bessel_i_negative_series(double nu, double x) {
  const double h = 0.5 * x;
  double sum = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double g = std::tgamma(-nu + k + 1.0);
    const double term = std::pow(h, -nu + 2.0 * k) / (std::tgamma(k + 1.0) * g);
    sum += term;
    if (k > nu + 2.0 && std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum;
}

double k_reflection_raw(double nu, double x) {
  const double diff = bessel_i_negative_series(nu, x) - bessel_i_series(nu, x);
  return std::numbers::pi / (2.0 * std::sin(nu * std::numbers::pi)) * diff;
}

}  // namespace

BesselOrder::BesselOrder(double nu) : nu_(nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("BesselOrder: ν must be positive (transient regime)");
  }
}

Interval::Interval(double a, double x, double b) : a_(a), x_(x), b_(b) {
  if (!(a > 0.0) || !(x >= a) || !(b > x)) {
    throw DomainError("Interval: need 0 < a <= x < b");
  }
}

double bessel_i(double nu, double x) {
  check_args(nu, x, "bessel_i");
  if (x <= std::max(10.0, 2.0 * nu)) return bessel_i_series(nu, x);
  const IK r = bessel_ik_scaled(nu, x);
  return r.i * std::exp(x);
}

double bessel_k(double nu, double x) {
  check_args(nu, x, "bessel_k");
  const IK r = bessel_ik_scaled(nu, x);
  const double k = r.k * std::exp(-x);
  if (!std::isfinite(k) || !(k > 0.0)) {
    throw DomainError("bessel_k: result outside double range");
  }
  return k;
}

double bessel_k_reflection(double nu, double x) {
  check_args(nu, x, "bessel_k_reflection");
  const double n = std::round(nu);
  constexpr double kEpsilon = 1e-3;
  if (std::abs(nu - n) > kEpsilon) return k_reflection_raw(nu, x);
  // K is even in ν, so the symmetric average kills odd terms; Richardson removes ε².
  auto sym = [&](double eps) {
    return 0.5 * (k_reflection_raw(n - eps, x) + k_reflection_raw(n + eps, x));
  };
  const double off = nu - n;
  if (n == 0.0) {
    // K_{-ε} = K_ε; evaluate the even function at ε1, ε2 and extrapolate to ε = |off|
    const double e1 = kEpsilon;
    const double e2 = 0.5 * kEpsilon;
    const double f1 = k_reflection_raw(e1, x);
    const double f2 = k_reflection_raw(e2, x);
    const double f0 = (4.0 * f2 - f1) / 3.0;
    // quadratic in ε through f0 at 0 and f2 at e2
    return f0 + (f2 - f0) * (off * off) / (e2 * e2);
  }
  const double e1 = kEpsilon;
  const double e2 = 0.5 * kEpsilon;
  const double f1 = sym(e1);
  const double f2 = sym(e2);
  const double f0 = (4.0 * f2 - f1) / 3.0;
  if (off == 0.0) return f0;
  // linear correction for a non-integer order inside the ε window
  const double slope = (k_reflection_raw(n + e1, x) - k_reflection_raw(n - e1, x)) / (2.0 * e1);
  return f0 + slope * off;
}

double s_nu(double nu, double u, double v) {
  const double iu = bessel_i(nu, u);
  const double kv = bessel_k(nu, v);
  const double ku = bessel_k(nu, u);
  const double iv = bessel_i(nu, v);
  return std::exp(-nu * (std::log(u) + std::log(v))) * (iu * kv - ku * iv);
}

double log_pow_diff(double u, double w, double p) {
  if (!(u > 0.0) || !(w >= u)) throw DomainError("log_pow_diff: need 0 < u <= w");
  if (std::isinf(w)) return -p * std::log(u);
  if (u == w) return -std::numeric_limits<double>::infinity();
  return -p * std::log(u) + std::log(-std::expm1(-p * std::log1p((w - u) / u)));
}

double hitting_probability(const BesselOrder& order, const Interval& iv) {
  if (iv.at_lower()) return 1.0;
  const double p = 2.0 * order.nu();
  return std::exp(log_pow_diff(iv.x(), iv.b(), p) - log_pow_diff(iv.a(), iv.b(), p));
}

double expected_exit_time(const BesselOrder& order, const Interval& iv) {
  if (std::isinf(iv.b())) throw DomainError("expected_exit_time: upper barrier must be finite");
  if (iv.at_lower()) return 0.0;
  const double nu = order.nu();
  const double p = 2.0 * nu;
  const double a = iv.a();
  const double x = iv.x();
  const double b = iv.b();
  // x^{2ν}(u^{-2ν} - w^{-2ν}) for the three pairs
  const double lx = p * std::log(x);
  const double d_ax = std::exp(log_pow_diff(a, x, p) + lx);
  const double d_xb = std::exp(log_pow_diff(x, b, p) + lx);
  const double d_ab = std::exp(log_pow_diff(a, b, p) + lx);
  // (b²-x²)a^{-2ν} + (x²-a²)b^{-2ν} - (b²-a²)x^{-2ν} = (b²-x²)D(a,x) - (x²-a²)D(x,b)
  const double num = (b - x) * (b + x) * d_ax - (x - a) * (x + a) * d_xb;
  return num / (2.0 * (nu + 1.0) * d_ab);
}

double exit_laplace(const BesselOrder& order, const Interval& iv, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("exit_laplace: α must be non-negative");
  if (std::isinf(iv.b())) throw DomainError("exit_laplace: upper barrier must be finite");
  if (alpha == 0.0 || iv.at_lower()) return 1.0;
  const double nu = order.nu();
  const double s = std::sqrt(2.0 * alpha);
  const double as = iv.a() * s;
  const double xs = iv.x() * s;
  const double bs = iv.b() * s;
  const double num = s_nu(nu, bs, xs) + s_nu(nu, xs, as);
  return num / s_nu(nu, bs, as);
}

}  // namespace bwlab::specfun
