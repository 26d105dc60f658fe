#include "bwlab/walklaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bwlab/errors.hpp"
#include "bwlab/lab/rng.hpp"

namespace bwlab::walklaw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_nu(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("Bessel order must be positive");
}

// a = -2ν log(1+h), b = -2ν log(1-h), h = 1/R. Then
// A_R = R^{-2ν} expm1(b), B_R = -R^{-2ν} expm1(a).
struct BandExponents {
  double a;
  double b;
};

BandExponents band_exponents(double nu, Level R) {
  const double h = 1.0 / static_cast<double>(R);
  return {-2.0 * nu * std::log1p(h), -2.0 * nu * std::log1p(-h)};
}

// Tail Σ_{j>J} f(j) from f(J) = e^{lam} and local decay exponent beta.
double log_tail_estimate(double lam, double beta, double step_log_ratio, Level J) {
  if (beta > 50.0) {
    const double r = std::exp(step_log_ratio);
    if (!(r < 1.0)) return kInf;
    return lam + std::log(r / (1.0 - r));
  }
  const double j = static_cast<double>(J);
  const double factor = j / (beta - 1.0) - 0.5 + beta / (12.0 * j);
  return lam + std::log(factor);
}

}  // namespace

WalkLaw WalkLaw::bessel(double nu) {
  check_nu(nu);
  return WalkLaw(BesselDerived{nu});
}

WalkLaw WalkLaw::power(double B, double gamma, double C, Perturbation rule) {
  if (!std::isfinite(B) || !(gamma > 0.0) || !(C >= 0.0) || !std::isfinite(C))
    throw DomainError("power family needs finite B, gamma > 0, C >= 0");
  return WalkLaw(PowerFamily{B, gamma, C, rule});
}

WalkLaw WalkLaw::table(std::vector<double> p, Explicit::Tail tail, double tail_value) {
  for (double v : p)
    if (!(v >= -0.5 && v <= 0.5)) throw DomainError("table entries must lie in [-1/2, 1/2]");
  if (tail == Explicit::Tail::Constant && !(tail_value >= -0.5 && tail_value <= 0.5))
    throw DomainError("constant tail must lie in [-1/2, 1/2]");
  if (!std::isfinite(tail_value)) throw DomainError("tail value must be finite");
  return WalkLaw(Explicit{std::move(p), tail, tail_value});
}

WalkLaw WalkLaw::constant(double p) { return table({}, Explicit::Tail::Constant, p); }

double WalkLaw::p(Level i) const {
  if (i < 0) throw DomainError("level must be nonnegative");
  if (i == 0) return 0.5;
  return std::visit(
      [i](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, BesselDerived>) {
          return p_bessel(f.nu, i);
        } else if constexpr (std::is_same_v<T, PowerFamily>) {
          const double j = static_cast<double>(i);
          double s = 0.0;
          switch (f.rule) {
            case Perturbation::None: s = 0.0; break;
            case Perturbation::Plus: s = 1.0; break;
            case Perturbation::Minus: s = -1.0; break;
            case Perturbation::Alternating: s = (i % 2 == 0) ? 1.0 : -1.0; break;
          }
          const double v = f.B / (4.0 * j) + s * f.C * std::pow(j, -f.gamma);
          return std::clamp(v, -0.5, 0.5);
        } else {
          if (static_cast<std::size_t>(i) <= f.table.size()) return f.table[static_cast<std::size_t>(i - 1)];
          if (f.tail == Explicit::Tail::Constant) return f.tail_value;
          return std::clamp(f.tail_value / (4.0 * static_cast<double>(i)), -0.5, 0.5);
        }
      },
      family_);
}

double WalkLaw::up_probability(Level i) const { return i == 0 ? 1.0 : 0.5 + p(i); }

double WalkLaw::log_u(Level i) const {
  if (i == 0) return -kInf;
  if (const auto* b = std::get_if<BesselDerived>(&family_);
      b && i >= 2 && (b->nu + 2.0) / static_cast<double>(i) > 1e-3) {
    const auto e = band_exponents(b->nu, i);
    return std::log(-std::expm1(e.a)) - std::log(std::expm1(e.b));
  }
  const double pi = p(i);
  if (pi <= -0.5) throw DomainError("U_i undefined where E_i = 0");
  return std::log1p(-2.0 * pi) - std::log1p(2.0 * pi);
}

std::optional<double> WalkLaw::bessel_nu() const {
  if (const auto* b = std::get_if<BesselDerived>(&family_)) return b->nu;
  return std::nullopt;
}

std::string WalkLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, BesselDerived>) {
          os << "bessel(nu=" << f.nu << ")";
        } else if constexpr (std::is_same_v<T, PowerFamily>) {
          static const char* names[] = {"none", "plus", "minus", "alternating"};
          os << "power(B=" << f.B << ",gamma=" << f.gamma << ",C=" << f.C
             << ",rule=" << names[static_cast<int>(f.rule)] << ")";
        } else {
          os << "table(n=" << f.table.size() << ",tail="
             << (f.tail == Explicit::Tail::Constant ? "constant" : "power") << ":" << f.tail_value
             << ")";
        }
      },
      family_);
  return os.str();
}

UpProbabilityTable::UpProbabilityTable(const WalkLaw& law, Level initial) : law_(&law) {
  grow(std::max<Level>(initial, 1) - 1);
}

void UpProbabilityTable::grow(Level i) {
  const std::size_t old = e_.size();
  const std::size_t want = std::max<std::size_t>(static_cast<std::size_t>(i) + 1, 2 * old);
  e_.resize(want);
  for (std::size_t k = old; k < want; ++k) e_[k] = law_->up_probability(static_cast<Level>(k));
}

double p_bessel(double nu, Level R) {
  check_nu(nu);
  if (R < 0) throw DomainError("level must be nonnegative");
  if (R <= 1) return 0.5;
  const double h = 1.0 / static_cast<double>(R);
  if (h * (nu + 2.0) <= 1e-3) {
    // Odd Taylor series in h; the next omitted term is O((νh)^10) relative.
    const double n = nu;
    const double common = (n - 1.0) * (n + 1.0) * (2.0 * n - 1.0) * (2.0 * n + 1.0);
    const double c1 = (2.0 * n + 1.0) / 4.0;
    const double c3 = -(n + 1.0) * (2.0 * n - 1.0) * (2.0 * n + 1.0) / 24.0;
    const double c5 = common * (6.0 * n + 7.0) / 360.0;
    const double c7 = -common * (((204.0 * n + 248.0) * n - 291.0) * n - 362.0) / 30240.0;
    const double c9 =
        common * ((((1240.0 * n + 1524.0) * n - 3730.0) * n - 4685.0) * n * n + 2955.0 * n + 3806.0) /
        453600.0;
    const double h2 = h * h;
    return h * (c1 + h2 * (c3 + h2 * (c5 + h2 * (c7 + h2 * c9))));
  }
  // p = (A - B)/(2(A + B)); with A = expm1(b), B = -expm1(a) (common factor
  // R^{-2ν} dropped), A - B = expm1(a + b) - expm1(a) expm1(b) has no cancellation.
  const auto e = band_exponents(nu, R);
  const double ea = std::expm1(e.a);
  const double eb = std::expm1(e.b);
  const double diff = std::expm1(e.a + e.b) - ea * eb;
  const double sum = eb - ea;
  return diff / (2.0 * sum);
}

BandDifferences band_differences(double nu, Level R) {
  check_nu(nu);
  if (R < 2) throw DomainError("band differences need R >= 2");
  const auto e = band_exponents(nu, R);
  const double scale = std::exp(-2.0 * nu * std::log(static_cast<double>(R)));
  return {scale * std::expm1(e.b), -scale * std::expm1(e.a)};
}

double u_ratio(const WalkLaw& law, Level i) {
  if (i < 1) throw DomainError("U_i is defined for i >= 1");
  const double lu = law.log_u(i);
  return std::exp(lu);
}

std::string to_string(Transience t) {
  switch (t) {
    case Transience::Transient: return "transient";
    case Transience::Recurrent: return "recurrent";
    case Transience::Inconclusive: break;
  }
  return "inconclusive";
}

TransienceVerdict is_transient(const WalkLaw& law, double margin, Level jmax) {
  if (jmax < 1000) throw DomainError("jmax must be at least 1000");
  if (!(margin > 0.0 && margin < 1.0)) throw DomainError("margin must lie in (0, 1)");
  const Level j1 = jmax / 100;
  const Level j2 = jmax / 10;
  double lam = 0.0, lam1 = 0.0, lam2 = 0.0, prev = 0.0;
  double log_sum = 0.0;  // empty product at the segment start
  Level seg_start = 1;
  for (Level k = 1; k <= jmax; ++k) {
    const double lu = law.log_u(k);
    prev = lam;
    if (lu == -kInf) {
      lam = 0.0;
      log_sum = 0.0;
      seg_start = k + 1;
    } else {
      lam += lu;
      log_sum = log_add(log_sum, lam);
    }
    if (k == j1) lam1 = lam;
    if (k == j2) lam2 = lam;
  }
  TransienceVerdict v;
  v.terms = jmax;
  v.partial_sum = std::exp(log_sum);
  if (seg_start > jmax - 10) {
    // Reflecting levels persist up to the horizon: the walk is pushed upward.
    v.verdict = Transience::Transient;
    v.decay_exponent = kInf;
    return v;
  }
  if (seg_start > j1) return v;
  const double ln10 = std::log(10.0);
  const double b1 = -(lam2 - lam1) / ln10;
  const double b2 = -(lam - lam2) / ln10;
  v.decay_exponent = b2;
  if (b1 > 1.0 + margin && b2 > 1.0 + margin) {
    v.verdict = Transience::Transient;
    v.tail_estimate = std::exp(log_tail_estimate(lam, b2, lam - prev, jmax));
  } else if (b1 < 1.0 - margin && b2 < 1.0 - margin) {
    v.verdict = Transience::Recurrent;
  }
  return v;
}

double LocalTimeLaw::pmf(std::uint64_t k) const {
  if (k == 0) return 0.0;
  return p_star * std::pow(q_star(), static_cast<double>(k - 1));
}

double d_tail_bessel_closed(double nu, Level R) {
  check_nu(nu);
  if (R < 1) throw DomainError("D(R, inf) needs R >= 1");
  return -1.0 / std::expm1(-2.0 * nu * std::log1p(1.0 / static_cast<double>(R)));
}

double d_tail(const WalkLaw& law, Level R, double tol, Level jmax) {
  if (R < 1) throw DomainError("D(R, inf) needs R >= 1");
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  double lam = 0.0, prev = 0.0, log_sum = 0.0;
  double lam_half = 0.0;
  Level half_j = 1, next_check = 1024;
  for (Level j = 1; j <= jmax; ++j) {
    const double lu = law.log_u(R + j);
    if (lu == -kInf) return std::exp(log_sum);
    prev = lam;
    lam += lu;
    log_sum = log_add(log_sum, lam);
    if (j == 512) {
      lam_half = lam;
      half_j = j;
    }
    if (j == next_check || j == jmax) {
      const double beta =
          -(lam - lam_half) / std::log(static_cast<double>(j) / static_cast<double>(half_j));
      if (beta > 1.02) {
        const double lt = log_tail_estimate(lam, beta, lam - prev, j);
        if (lt - log_sum < std::log(tol) || j == jmax) return std::exp(log_add(log_sum, lt));
      }
      next_check *= 2;
      lam_half = lam;
      half_j = j;
    }
  }
  throw ConvergenceError("products of U do not decay fast enough within jmax terms");
}

LocalTimeLaw local_time_law(const WalkLaw& law, Level R) {
  if (R < 2) throw DomainError("local time law is defined for R >= 2");
  LocalTimeLaw out;
  out.level = R;
  const double up = law.up_probability(R);
  if (auto nu = law.bessel_nu()) {
    out.p_star = up / d_tail_bessel_closed(*nu, R);
    const double r = static_cast<double>(R);
    const double lemma = up * (std::pow(r + 1.0, 2.0 * *nu) - std::pow(r, 2.0 * *nu)) /
                         std::pow(r + 1.0, 2.0 * *nu);
    if (std::abs(lemma - out.p_star) > 1e-12)
      throw std::logic_error("Bessel local time parameter disagrees with its closed form");
  } else {
    out.p_star = up / d_tail(law, R);
  }
  return out;
}

ReturnTail::ReturnTail(const WalkLaw& law, Level max_level, bool force_numeric, Level horizon)
    : max_level_(max_level) {
  if (max_level < 1) throw DomainError("max_level must be >= 1");
  if (!force_numeric) bessel_nu_ = law.bessel_nu();
  if (bessel_nu_) return;

  const auto n = static_cast<std::size_t>(max_level) + 1;
  lambda_.assign(n, 0.0);
  log_t_.assign(n, -kInf);
  zeros_.assign(n, 0);
  zeros_[0] = 1;  // E_0 = 1
  for (Level k = 1; k <= max_level; ++k) {
    const double lu = law.log_u(k);
    const auto i = static_cast<std::size_t>(k);
    zeros_[i] = zeros_[i - 1] + (lu == -kInf ? 1 : 0);
    lambda_[i] = (lu == -kInf) ? 0.0 : lambda_[i - 1] + lu;
  }

  // Sum beyond max_level: up to the next reflecting level, or to the horizon
  // with a fitted tail.
  const Level J = horizon > 0 ? horizon
                              : std::clamp<Level>(64 * max_level, Level{1} << 20, Level{1} << 26);
  if (J <= max_level) throw DomainError("horizon must exceed max_level");
  double lam = lambda_.back();
  double prev = lam;
  double lam_decade = lam;
  double beyond = -kInf;
  bool closed = false;
  const Level decade = std::max<Level>(max_level + 1, J / 10);
  for (Level j = max_level + 1; j <= J; ++j) {
    const double lu = law.log_u(j);
    if (lu == -kInf) {
      closed = true;
      break;
    }
    prev = lam;
    lam += lu;
    beyond = log_add(beyond, lam);
    if (j == decade) lam_decade = lam;
  }
  if (!closed) {
    const double beta =
        -(lam - lam_decade) / std::log(static_cast<double>(J) / static_cast<double>(decade));
    if (!(beta > 1.02))
      throw ConvergenceError("return tail: products of U do not decay (law not transient?)");
    beyond = log_add(beyond, log_tail_estimate(lam, beta, lam - prev, J));
  }

  double next = beyond;  // log T(max_level + 1)
  for (Level k = max_level; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const bool link = (k < max_level) ? (zeros_[i + 1] == zeros_[i]) : true;
    log_t_[i] = log_add(lambda_[i], link ? next : -kInf);
    next = log_t_[i];
  }
}

bool ReturnTail::reflecting_between(Level lo, Level hi) const {
  return zeros_[static_cast<std::size_t>(hi)] != zeros_[static_cast<std::size_t>(lo)];
}

double ReturnTail::return_probability(Level from, Level to) const {
  if (to < 0 || to > from) throw DomainError("need 0 <= to <= from");
  if (!bessel_nu_ && from > max_level_) throw DomainError("level beyond the tabulated range");
  if (to == from) return 1.0;
  if (bessel_nu_) {
    if (to == 0) return 0.0;
    return std::exp(2.0 * *bessel_nu_ * std::log(static_cast<double>(to) / static_cast<double>(from)));
  }
  if (reflecting_between(to, from)) return 0.0;
  return std::exp(log_t(from) - log_t(to));
}

double ReturnTail::d_tail(Level R) const {
  if (R < 1 || (!bessel_nu_ && R > max_level_)) throw DomainError("level beyond the tabulated range");
  if (bessel_nu_) return d_tail_bessel_closed(*bessel_nu_, R);
  return std::exp(log_t(R) - lambda_[static_cast<std::size_t>(R)]);
}

Level ReturnTail::sample_future_infimum(Level from, lab::RngStream& rng) const {
  if (from < 0 || (!bessel_nu_ && from > max_level_))
    throw DomainError("level beyond the tabulated range");
  const double u = rng.uniform();
  if (bessel_nu_) {
    if (from <= 1) return from;
    const double m = static_cast<double>(from);
    auto l = static_cast<Level>(std::ceil(m * std::exp(std::log(u) / (2.0 * *bessel_nu_))));
    l = std::clamp<Level>(l, 1, from);
    // Smallest l with (l/m)^{2ν} >= u; correct rounding at the boundary.
    while (l > 1 && return_probability(from, l - 1) >= u) --l;
    while (l < from && return_probability(from, l) < u) ++l;
    return l;
  }
  // Lowest reachable level is the last reflecting level at or below `from`.
  Level lo = 0, hi = from;
  const auto zf = zeros_[static_cast<std::size_t>(from)];
  {
    Level a = 0, b = from;  // find smallest k with zeros_[k] == zf
    while (a < b) {
      const Level mid = a + (b - a) / 2;
      if (zeros_[static_cast<std::size_t>(mid)] == zf) b = mid; else a = mid + 1;
    }
    lo = a;
  }
  const double target = log_t(from) - std::log(u);
  while (lo < hi) {
    const Level mid = lo + (hi - lo) / 2;
    if (log_t(mid) <= target) hi = mid; else lo = mid + 1;
  }
  return lo;
}

double return_probability(const WalkLaw& law, Level from, Level to) {
  if (to < 0 || to > from) throw DomainError("need 0 <= to <= from");
  if (to == from) return 1.0;
  ReturnTail tail(law, from, true);
  const double p = tail.return_probability(from, to);
  if (auto nu = law.bessel_nu(); nu && to >= 1) {
    const double closed = std::pow(static_cast<double>(to) / static_cast<double>(from), 2.0 * *nu);
    if (std::abs(p - closed) > 1e-10 * std::max(closed, 1e-300))
      throw std::logic_error("Bessel return probability disagrees with its closed form");
    return closed;
  }
  return p;
}

double truncated_chain_pstar(const WalkLaw& law, Level R, Level N) {
  if (R < 0 || N <= R + 1) throw DomainError("need 0 <= R < N - 1");
  // Upper block, eliminated from the absorbing end: h(i) = β_i h(i-1) with
  // g_i = 1 - β_i = E_i g_{i+1} / ((1 - E_i) + E_i g_{i+1}), g_N = 1.
  double g = 1.0;
  for (Level i = N - 1; i > R; --i) {
    const double pi = law.p(i);
    const double up = 0.5 + pi;
    const double down = 0.5 - pi;
    g = up * g / (down + up * g);
  }
  // Lower block {0..R-1} is closed and reflecting: it returns to R with
  // probability one unless some level below R never steps up.
  bool lower_returns = true;
  for (Level i = 1; i < R; ++i)
    if (!(law.up_probability(i) > 0.0)) lower_returns = false;
  const double up = law.up_probability(R);
  const double down = R == 0 ? 0.0 : 0.5 - law.p(R);
  return up * g + (lower_returns ? 0.0 : down);
}

LocalTimeLaw truncated_chain_oracle(const WalkLaw& law, Level R, Level N, double stab_tol) {
  const double p1 = truncated_chain_pstar(law, R, N);
  const double p2 = truncated_chain_pstar(law, R, 2 * N);
  if (std::abs(p1 - p2) > stab_tol)
    throw ConvergenceError("truncated chain not stabilized: increase N");
  return {R, p2};
}

LocalTimeLaw truncated_chain_oracle_auto(const WalkLaw& law, Level R, double stab_tol, Level max_N) {
  Level N = std::max<Level>(1024, 64 * R);
  double prev = truncated_chain_pstar(law, R, N);
  while (2 * N <= max_N) {
    N *= 2;
    const double cur = truncated_chain_pstar(law, R, N);
    if (std::abs(cur - prev) <= stab_tol) return {R, cur};
    prev = cur;
  }
  throw ConvergenceError("truncated chain did not stabilize below max_N");
}

}  // namespace bwlab::walklaw
