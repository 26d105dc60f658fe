#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bwlab::lab {
class RngStream;
}

namespace bwlab::walklaw {

using Level = std::int64_t;

/// Sign pattern applied to the C/j^γ perturbation of a power family.
enum class Perturbation { None, Plus, Minus, Alternating };

/// p_R from the unit-band exit law of a Bessel process of order ν; p_0 = p_1 = 1/2.
struct BesselDerived {
  double nu;
};

/// p_j = B/(4j) + s_j C/j^γ, clamped to [-1/2, 1/2].
struct PowerFamily {
  double B;
  double gamma;
  double C;
  Perturbation rule = Perturbation::None;
};

/// p_1..p_n from a table, then a tail rule: p_i = value/(4i) (Power) or value (Constant).
struct Explicit {
  enum class Tail { Power, Constant };
  std::vector<double> table;
  Tail tail = Tail::Constant;
  double tail_value = 0.0;
};

using Family = std::variant<BesselDerived, PowerFamily, Explicit>;

/// Law of a nearest-neighbour walk on {0, 1, ...}: up-probability E_0 = 1 and
/// E_i = 1/2 + p_i for i >= 1. Immutable.
class WalkLaw {
 public:
  static WalkLaw bessel(double nu);
  static WalkLaw power(double B, double gamma, double C, Perturbation rule = Perturbation::None);
  static WalkLaw table(std::vector<double> p, Explicit::Tail tail, double tail_value);
  static WalkLaw constant(double p);

  double p(Level i) const;
  double up_probability(Level i) const;
  // log U_i = log((1/2 - p_i)/(1/2 + p_i)); -inf where U_i = 0.
  double log_u(Level i) const;

  const Family& family() const { return family_; }
  std::optional<double> bessel_nu() const;
  std::string describe() const;

 private:
  explicit WalkLaw(Family f) : family_(std::move(f)) {}
  Family family_;
};

/// Grows a cache of E_i on demand. One per trajectory; not thread-safe.
class UpProbabilityTable {
 public:
  explicit UpProbabilityTable(const WalkLaw& law, Level initial = 1024);
  double operator()(Level i) {
    if (static_cast<std::size_t>(i) >= e_.size()) grow(i);
    return e_[static_cast<std::size_t>(i)];
  }
  const WalkLaw& law() const { return *law_; }

 private:
  void grow(Level i);
  const WalkLaw* law_;
  std::vector<double> e_;
};

// p_R of the Bessel-derived law, evaluated without cancellation.
double p_bessel(double nu, Level R);
// U_R = (1/2 - p_R)/(1/2 + p_R).
double u_ratio(const WalkLaw& law, Level i);

// A_R = (R-1)^{-2ν} - R^{-2ν} and B_R = R^{-2ν} - (R+1)^{-2ν}, R >= 2.
struct BandDifferences {
  double a;
  double b;
};
BandDifferences band_differences(double nu, Level R);

enum class Transience { Transient, Recurrent, Inconclusive };
std::string to_string(Transience t);

struct TransienceVerdict {
  Transience verdict = Transience::Inconclusive;
  double decay_exponent = 0.0;  // fitted β in ∏U_i ~ k^{-β} over the last decade
  double partial_sum = 0.0;     // Σ_{k<=jmax} ∏U_i over the final reflecting segment
  double tail_estimate = 0.0;   // estimated Σ_{k>jmax} (transient only)
  Level terms = 0;
};

/// Classifies Σ_k ∏_{i<=k} U_i. Products are accumulated in log space from the
/// last level with U_i = 0 (a reflecting level). `margin` is the half-width of
/// the inconclusive band around decay exponent 1.
TransienceVerdict is_transient(const WalkLaw& law, double margin = 0.1, Level jmax = 1'000'000);

/// Geometric law of the total local time ξ(R, ∞).
struct LocalTimeLaw {
  Level level = 0;
  double p_star = 1.0;

  double q_star() const { return 1.0 - p_star; }
  double pmf(std::uint64_t k) const;
  double mean() const { return 1.0 / p_star; }
};

/// Reverse-cumulative tail sums T(k) = Σ_{j>=k} ∏_{i=k+1}^{j} U_i (rescaled),
/// used for return probabilities, D(R,∞) and sampling the future infimum.
/// Bessel-derived laws use the telescoped closed forms unless `force_numeric`.
class ReturnTail {
 public:
  ReturnTail(const WalkLaw& law, Level max_level, bool force_numeric = false,
             Level horizon = 0);

  // P(walk started at `from` ever visits `to`), to <= from; numeric tables
  // need from <= max_level, the closed form takes any level.
  double return_probability(Level from, Level to) const;
  // D(R, ∞) = 1 + Σ_j ∏_{i=1}^{j} U_{R+i}
  double d_tail(Level R) const;
  // Exact draw of inf_{k>=0} of the walk started at `from`.
  Level sample_future_infimum(Level from, lab::RngStream& rng) const;

  Level max_level() const { return max_level_; }
  bool closed_form() const { return bessel_nu_.has_value(); }

 private:
  double log_t(Level k) const { return log_t_[static_cast<std::size_t>(k)]; }
  bool reflecting_between(Level lo, Level hi) const;  // some U_i = 0, lo < i <= hi

  std::optional<double> bessel_nu_;
  Level max_level_;
  std::vector<double> lambda_;     // Λ_k, k <= max_level
  std::vector<double> log_t_;      // log T(k), k <= max_level
  std::vector<std::int32_t> zeros_;  // prefix count of U_i = 0, i <= max_level
};

/// D(R, ∞) by truncated summation of ∏U with a fitted power-law or geometric
/// tail correction. Throws ConvergenceError when the products do not decay.
double d_tail(const WalkLaw& law, Level R, double tol = 1e-12, Level jmax = 10'000'000);
double d_tail_bessel_closed(double nu, Level R);

/// p*_R = (1/2 + p_R)/D(R,∞), R >= 2.
LocalTimeLaw local_time_law(const WalkLaw& law, Level R);

double return_probability(const WalkLaw& law, Level from, Level to);

/// First-step linear system of the chain absorbed at N, solved by a streaming
/// tridiagonal elimination; the visit count to R is exactly geometric with the
/// returned parameter.
double truncated_chain_pstar(const WalkLaw& law, Level R, Level N);
// Requires |p*_N - p*_{2N}| <= stab_tol, else ConvergenceError.
LocalTimeLaw truncated_chain_oracle(const WalkLaw& law, Level R, Level N, double stab_tol = 1e-8);
// Doubles N from max(1024, 64R) until stable; gives up past max_N.
LocalTimeLaw truncated_chain_oracle_auto(const WalkLaw& law, Level R, double stab_tol = 1e-8,
                                         Level max_N = Level{1} << 28);

}  // namespace bwlab::walklaw
