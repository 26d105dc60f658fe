#include "bwlab/classtest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"

namespace bwlab::classtest {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_of(const LogNum& v) {
  if (v.sign < 0) throw DomainError("boundary function must be non-negative");
  return v.sign == 0 ? kNegInf : v.la;
}

double value_of(const LogNum& v) {
  if (v.sign < 0) throw DomainError("boundary function must be non-negative");
  return v.value();
}

struct TestInfo {
  TestId id;
  std::string_view name;
  bool series;
  Monotone monotone;
  TestId counterpart;
  std::string_view boundary;  // boundary expression in the class statement
  std::string_view process;
  bool upper;
};

constexpr std::array<TestInfo, 14> kTests{{
    {TestId::BesselUpper, "bessel-upper", false, Monotone::NonDecreasing, TestId::BesselUpper,
     "t^{1/2}a(t)", "Y", true},
    {TestId::BesselLower, "bessel-lower", false, Monotone::NonIncreasing, TestId::BesselLower,
     "t^{1/2}b(t)", "Y", false},
    {TestId::FutureInfUpper, "future-inf-upper", false, Monotone::NonDecreasing,
     TestId::FutureInfUpper, "t^{1/2}psi(t)", "I", true},
    {TestId::EscapeLower, "escape-lower", false, Monotone::NonIncreasing, TestId::EscapeLower,
     "t^2 phi(t)", "A", false},
    {TestId::GapUpper, "gap-upper", false, Monotone::NonDecreasing, TestId::GapUpper,
     "t^{1/2}psi(t)", "Y-I", true},
    {TestId::RangeLower, "range-lower", false, Monotone::LogRatioNonDecreasing, TestId::RangeLower,
     "1/rho(t)", "M-I", false},
    {TestId::LocalTimeUpper, "localtime-upper", false, Monotone::NonDecreasing,
     TestId::LocalTimeUpper, "R f(R)", "eta(R,inf)", true},
    {TestId::WalkUpper, "walk-upper", true, Monotone::NonDecreasing, TestId::BesselUpper,
     "n^{1/2}a(n)", "X_n", true},
    {TestId::WalkLower, "walk-lower", true, Monotone::NonIncreasing, TestId::BesselLower,
     "n^{1/2}b(n)", "X_n", false},
    {TestId::WalkFutureInfUpper, "walk-future-inf-upper", true, Monotone::NonDecreasing,
     TestId::FutureInfUpper, "n^{1/2}psi(n)", "J_n", true},
    {TestId::WalkEscapeLower, "walk-escape-lower", true, Monotone::NonIncreasing,
     TestId::EscapeLower, "n^2 phi(n)", "G_n", false},
    {TestId::WalkGapUpper, "walk-gap-upper", true, Monotone::NonDecreasing, TestId::GapUpper,
     "n^{1/2}psi(n)", "X_n-J_n", true},
    {TestId::WalkRangeLower, "walk-range-lower", true, Monotone::LogRatioNonDecreasing,
     TestId::RangeLower, "1/rho(n)", "Q_n-J_n", false},
    {TestId::WalkLocalTimeUpper, "walk-localtime-upper", true, Monotone::NonDecreasing,
     TestId::LocalTimeUpper, "R f(R)", "xi(R,inf)", true},
}};

const TestInfo& info(TestId id) { return kTests[static_cast<std::size_t>(id)]; }

// Log of the continuous integrand with respect to log x.
double log_density(TestId cont, const BoundaryFunction& f, double nu, const Point& p) {
  switch (cont) {
    case TestId::BesselUpper: {
      const LogNum a = f.eval(p);
      const double v = value_of(a);
      return (2.0 * nu + 2.0) * log_of(a) - 0.5 * v * v;
    }
    case TestId::BesselLower:
      return 2.0 * nu * log_of(f.eval(p)) - std::log(std::numbers::ln2);
    case TestId::FutureInfUpper: {
      const LogNum s = f.eval(p);
      const double v = value_of(s);
      return 2.0 * nu * log_of(s) - 0.5 * v * v;
    }
    case TestId::EscapeLower: {
      const LogNum phi = f.eval(p);
      const double v = value_of(phi);
      if (v == 0.0) return kNegInf;
      return -nu * log_of(phi) - 0.5 / v;
    }
    case TestId::GapUpper: {
      const LogNum s = f.eval(p);
      const double v = value_of(s);
      return (2.0 - 2.0 * nu) * log_of(s) - 0.5 * v * v;
    }
    case TestId::RangeLower:
      return -f.log_log(p);
    case TestId::LocalTimeUpper: {
      const LogNum g = f.eval(p);
      return log_of(g) - nu * value_of(g);
    }
    default:
      break;
  }
  throw DomainError("not a continuous test");
}

double series_term(TestId id, const BoundaryFunction& f, double nu, long k) {
  const TestInfo& t = info(id);
  if (id == TestId::WalkLower) {
    // b(2^k)^{B-1}
    const Point p{std::log(static_cast<double>(k) * std::numbers::ln2)};
    return std::exp(log_density(t.counterpart, f, nu, p) + std::log(std::numbers::ln2));
  }
  const Point p = Point::at(static_cast<double>(k));
  return std::exp(log_density(t.counterpart, f, nu, p)) / static_cast<double>(k);
}

// log ∫_a^b exp(phi). Pieces on which phi spans more than a few e-folds are
// bisected, higher half first, so steep (super-exponential) blocks keep only
// the part that matters; pieces 60 e-folds below the best value seen so far
// are dropped.
struct Piece {
  double a, b;
  std::array<double, 9> y;
  double lo, hi;
};

template <class F>
Piece sample_piece(const F& phi, double a, double b, bool& valid) {
  Piece p{a, b, {}, std::numeric_limits<double>::infinity(), kNegInf};
  for (int i = 0; i <= 8; ++i) {
    const double y = phi(a + (b - a) * i / 8.0);
    if (std::isnan(y) || y == std::numeric_limits<double>::infinity()) valid = false;
    p.y[static_cast<std::size_t>(i)] = y;
    p.lo = std::min(p.lo, y);
    p.hi = std::max(p.hi, y);
  }
  return p;
}

// Shared state of one block integral. Rounding noise in phi can make every
// piece look steep; the piece budget turns that into an invalid block.
struct Walk {
  double best = kNegInf;
  bool valid = true;
  long pieces = 0;
};
constexpr long kPieceBudget = 20000;

template <class F>
double log_integral(const F& phi, const Piece& p, double rel_tol, int depth, Walk& st) {
  double& best = st.best;
  bool& valid = st.valid;
  if (!valid) return kNaN;
  if (++st.pieces > kPieceBudget) {
    valid = false;
    return kNaN;
  }
  if (p.hi == kNegInf || p.hi < best - 60.0) return kNegInf;
  if (p.hi - p.lo > 4.0) {
    if (depth >= 48) {
      // exact for phi linear between the end points
      const double y0 = p.y.front(), y1 = p.y.back(), w = p.b - p.a;
      best = std::max(best, p.hi);
      if (y0 == kNegInf || y1 == kNegInf) return std::max(y0, y1) + std::log(w / 4.0);
      const double d = std::abs(y1 - y0);
      return std::max(y0, y1) + std::log(w) + std::log(-std::expm1(-d)) - std::log(d);
    }
    const double mid = 0.5 * (p.a + p.b);
    const Piece l = sample_piece(phi, p.a, mid, valid);
    const Piece r = sample_piece(phi, mid, p.b, valid);
    if (!valid) return kNaN;
    double ll, lr;
    if (l.hi >= r.hi) {
      ll = log_integral(phi, l, rel_tol, depth + 1, st);
      lr = log_integral(phi, r, rel_tol, depth + 1, st);
    } else {
      lr = log_integral(phi, r, rel_tol, depth + 1, st);
      ll = log_integral(phi, l, rel_tol, depth + 1, st);
    }
    if (!valid) return kNaN;
    const double m = std::max(ll, lr);
    if (m == kNegInf) return kNegInf;
    return m + std::log(std::exp(ll - m) + std::exp(lr - m));
  }
  best = std::max(best, p.hi);
  double err = 0.0;
  const double hi = p.hi;
  const double tol = std::max(rel_tol, 1e-12 * std::abs(hi));  // rounding floor of phi
  // on [0, 1]: the quadrature's error estimate breaks down on intervals that
  // are tiny next to their end points
  const double w = p.b - p.a;
  const double I = w * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return std::exp(phi(p.a + w * t) - hi); }, 0.0, 1.0, 8, tol, &err);
  if (!std::isfinite(I) || I < 0.0) {
    valid = false;
    return kNaN;
  }
  return I > 0.0 ? hi + std::log(I) : kNegInf;
}

struct ScaleResult {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> log_sums;
  std::vector<double> ratios;
};

ScaleResult run_scale(int scale, TestId cont, const BoundaryFunction& f, double nu,
                      const TestOptions& opt) {
  const double u0 = std::log(std::log(opt.x0));
  const double v0 = scale == 1 ? u0 : std::log(u0);
  const int blocks = scale == 1 ? opt.blocks_scale1 : opt.blocks_scale2;
  auto phi = [&](double v) -> double {
    try {
      if (scale == 1) return log_density(cont, f, nu, Point{v}) + v;
      const double u = std::exp(v);
      return log_density(cont, f, nu, Point{u}) + u + v;
    } catch (const DomainError&) {
      return kNaN;
    }
  };

  ScaleResult r;
  for (int k = 0; k < blocks; ++k) {
    Walk st;
    const Piece piece = sample_piece(phi, v0 + k, v0 + k + 1.0, st.valid);
    const double ls = st.valid ? log_integral(phi, piece, opt.rel_tol, 0, st) : kNaN;
    if (!st.valid) break;
    r.log_sums.push_back(ls);
  }

  const auto n = static_cast<int>(r.log_sums.size());
  if (n < opt.window + 1) return r;
  bool conv = true, div = true, all_zero = true;
  for (int k = n - opt.window - 1; k < n - 1; ++k) {
    const double a = r.log_sums[static_cast<std::size_t>(k)];
    const double b = r.log_sums[static_cast<std::size_t>(k) + 1];
    if (a != kNegInf || b != kNegInf) all_zero = false;
    const double ratio = (a == kNegInf && b == kNegInf) ? 0.0 : std::exp(b - a);
    r.ratios.push_back(ratio);
    conv = conv && ratio <= opt.ratio;
    // block sums no smaller than c/k: (k+1) s_{k+1} >= k s_k
    div = div && a != kNegInf && b != kNegInf &&
          std::log(k + 2.0) + b >= std::log(k + 1.0) + a - 1e-9;
  }
  if (all_zero) r.verdict = Verdict::Converges;
  else if (conv && !div) r.verdict = Verdict::Converges;
  else if (div && !conv) r.verdict = Verdict::Diverges;
  return r;
}

void check_monotone(const BoundaryFunction& f, Monotone need, const TestOptions& opt) {
  if (f.monotone() != need)
    throw DomainError("test needs a " + std::string(to_string(need)) + " boundary function, got " +
                      std::string(to_string(f.monotone())));
  const double u0 = std::log(std::log(opt.x0));
  const double u1 = u0 + opt.blocks_scale1;
  double prev = 0.0;
  bool first = true;
  for (double u = u0; u <= u1; u += 0.125) {
    const Point p{u};
    double key;
    if (need == Monotone::LogRatioNonDecreasing) {
      key = f.log_log(p) - u;
    } else {
      key = log_of(f.eval(p));
    }
    if (!first) {
      const double slack = 1e-12 * std::max(1.0, std::abs(prev));
      const bool bad = need == Monotone::NonIncreasing ? key > prev + slack : key < prev - slack;
      if (bad) {
        std::ostringstream os;
        os << "boundary function is not " << to_string(need) << " near log log x = " << u;
        throw DomainError(os.str());
      }
    }
    prev = key;
    first = false;
  }
}

}  // namespace

std::string_view to_string(Monotone m) {
  switch (m) {
    case Monotone::NonDecreasing: return "non-decreasing";
    case Monotone::NonIncreasing: return "non-increasing";
    case Monotone::LogRatioNonDecreasing: return "log-ratio-non-decreasing";
  }
  return "?";
}

BoundaryFunction BoundaryFunction::sqrt_loglog(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("c must be positive");
  return BoundaryFunction(SqrtLogLog{c});
}
BoundaryFunction BoundaryFunction::power_log(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");
  return BoundaryFunction(PowerLog{beta});
}
BoundaryFunction BoundaryFunction::inverse_log_pow(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");
  return BoundaryFunction(InverseLogPow{beta});
}
BoundaryFunction BoundaryFunction::reciprocal_loglog(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("c must be positive");
  return BoundaryFunction(ReciprocalLogLog{c});
}
BoundaryFunction BoundaryFunction::scaled_loglog(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be >= 0");
  return BoundaryFunction(ScaledLogLog{c});
}
BoundaryFunction BoundaryFunction::expression(std::string_view text, Monotone monotone) {
  return BoundaryFunction(User{Expression::parse(text), monotone});
}

LogNum BoundaryFunction::eval(const Point& p) const {
  return std::visit(
      [&](const auto& f) -> LogNum {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SqrtLogLog>) {
          if (!(p.u > 0.0)) throw DomainError("sqrt(c loglog x) needs x > e");
          return LogNum::positive_log(0.5 * (std::log(f.c) + std::log(p.u)));
        } else if constexpr (std::is_same_v<T, PowerLog>) {
          return LogNum::positive_log(-f.beta * p.u);
        } else if constexpr (std::is_same_v<T, InverseLogPow>) {
          if (!(p.u > 0.0)) throw DomainError("rho needs x > e");
          return LogNum::positive_log(std::exp(p.u) * std::pow(p.u, f.beta));
        } else if constexpr (std::is_same_v<T, ReciprocalLogLog>) {
          if (!(p.u > 0.0)) throw DomainError("1/(c loglog x) needs x > e");
          return LogNum::positive_log(-std::log(f.c) - std::log(p.u));
        } else if constexpr (std::is_same_v<T, ScaledLogLog>) {
          return LogNum::of(f.c * p.u);
        } else {
          return f.expr.eval(p);
        }
      },
      family_);
}

double BoundaryFunction::log_log(const Point& p) const {
  if (const auto* f = std::get_if<InverseLogPow>(&family_)) {
    if (!(p.u > 0.0)) throw DomainError("rho needs x > e");
    return p.u + f->beta * std::log(p.u);
  }
  const LogNum v = eval(p);
  if (v.sign <= 0 || !(v.la > 0.0)) throw DomainError("log rho must be positive");
  return std::log(v.la);
}

Monotone BoundaryFunction::monotone() const {
  return std::visit(
      [](const auto& f) -> Monotone {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SqrtLogLog> || std::is_same_v<T, ScaledLogLog>)
          return Monotone::NonDecreasing;
        else if constexpr (std::is_same_v<T, PowerLog> || std::is_same_v<T, ReciprocalLogLog>)
          return Monotone::NonIncreasing;
        else if constexpr (std::is_same_v<T, InverseLogPow>)
          return Monotone::LogRatioNonDecreasing;
        else
          return f.monotone;
      },
      family_);
}

std::string BoundaryFunction::family_name() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SqrtLogLog>) return "sqrt_loglog";
        else if constexpr (std::is_same_v<T, PowerLog>) return "power_log";
        else if constexpr (std::is_same_v<T, InverseLogPow>) return "inverse_log_pow";
        else if constexpr (std::is_same_v<T, ReciprocalLogLog>) return "reciprocal_loglog";
        else if constexpr (std::is_same_v<T, ScaledLogLog>) return "scaled_loglog";
        else return "expression";
      },
      family_);
}

std::string BoundaryFunction::params() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SqrtLogLog> || std::is_same_v<T, ReciprocalLogLog> ||
                      std::is_same_v<T, ScaledLogLog>)
          return "c=" + lab::format_short(f.c);
        else if constexpr (std::is_same_v<T, PowerLog> || std::is_same_v<T, InverseLogPow>)
          return "beta=" + lab::format_short(f.beta);
        else
          return f.expr.text();
      },
      family_);
}

std::string_view to_string(TestId id) { return info(id).name; }

std::optional<TestId> parse_test_id(std::string_view s) {
  for (const auto& t : kTests)
    if (t.name == s) return t.id;
  return std::nullopt;
}

const std::vector<TestId>& all_tests() {
  static const std::vector<TestId> v = [] {
    std::vector<TestId> out;
    for (const auto& t : kTests) out.push_back(t.id);
    return out;
  }();
  return v;
}

bool is_series(TestId id) { return info(id).series; }
Monotone required_monotone(TestId id) { return info(id).monotone; }
TestId continuous_counterpart(TestId id) { return info(id).counterpart; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "converges";
    case Verdict::Diverges: return "diverges";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

TestVerdict evaluate_test(TestId id, const BoundaryFunction& f, double param,
                          const TestOptions& opt) {
  if (!(opt.x0 > std::numbers::e)) throw DomainError("x0 must exceed e");
  if (opt.window < 1 || !(opt.ratio > 0.0 && opt.ratio < 1.0))
    throw DomainError("bad certification options");
  const TestInfo& t = info(id);
  double nu = 0.0;
  if (id != TestId::RangeLower && id != TestId::WalkRangeLower) {
    if (!std::isfinite(param)) throw DomainError("parameter must be finite");
    if (!t.series || id == TestId::WalkLocalTimeUpper) {
      if (!(param > 0.0)) throw DomainError("nu must be positive");
      nu = param;
    } else {
      if (!(param > 1.0)) throw DomainError("B must exceed 1");
      nu = (param - 1.0) / 2.0;
    }
  }
  check_monotone(f, t.monotone, opt);

  // The logloglog scale reaches much further out, so it decides whenever it
  // certifies; slow power tails in loglog x fool the first scale's window.
  TestVerdict out{id, Verdict::Inconclusive, {}};
  ScaleResult r1 = run_scale(1, t.counterpart, f, nu, opt);
  ScaleResult r2 = run_scale(2, t.counterpart, f, nu, opt);
  ScaleResult& r = r2.verdict != Verdict::Inconclusive ? r2 : r1;
  out.verdict = r.verdict;
  out.diag.scale = r.verdict == Verdict::Inconclusive ? 0 : (&r == &r2 ? 2 : 1);
  out.diag.log_block_sums = std::move(r.log_sums);
  out.diag.tail_ratios = std::move(r.ratios);
  double m = kNegInf;
  for (double v : out.diag.log_block_sums) m = std::max(m, v);
  double s = 0.0;
  if (m != kNegInf)
    for (double v : out.diag.log_block_sums) s += std::exp(v - m);
  out.diag.log_partial_sum = m == kNegInf ? kNegInf : m + std::log(s);

  if (t.series) {
    const long k0 = id == TestId::WalkLower ? static_cast<long>(std::ceil(std::log2(opt.x0)))
                                            : static_cast<long>(std::ceil(opt.x0));
    double sum = 0.0;
    for (long k = k0; k <= opt.series_terms; ++k) sum += series_term(id, f, nu, k);
    out.diag.direct_partial_sum = sum;
  }
  return out;
}

std::string verdict_to_class(TestId id, Verdict v) {
  if (v == Verdict::Inconclusive) throw DomainError("an inconclusive verdict implies no class");
  const TestInfo& t = info(id);
  const std::string b(t.boundary), p(t.process);
  const std::string in = t.upper ? "UUC" : "LLC";
  const std::string other = t.upper ? "ULC" : "LUC";
  if (v == Verdict::Converges) return b + " in " + in + "(" + p + ")";
  return b + " not in " + in + "(" + p + "), so " + b + " in " + other + "(" + p + ")";
}

void write_verdict_csv(std::ostream& os, const std::vector<VerdictRow>& rows) {
  lab::CsvWriter w(os, {"test", "family", "params", "param", "verdict", "class"});
  for (const auto& r : rows) {
    w.cell(to_string(r.id)).cell(r.family).cell(r.params).cell(r.param).cell(to_string(r.verdict));
    w.cell(r.verdict == Verdict::Inconclusive ? std::string{} : verdict_to_class(r.id, r.verdict));
    w.row_end();
  }
}

}  // namespace bwlab::classtest
