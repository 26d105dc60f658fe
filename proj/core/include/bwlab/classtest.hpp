#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bwlab/expression.hpp"

namespace bwlab::classtest {

enum class Monotone { NonDecreasing, NonIncreasing, LogRatioNonDecreasing };
std::string_view to_string(Monotone m);

/// Boundary function of a class test.
///  - SqrtLogLog{c}:       sqrt(c loglog x), non-decreasing
///  - PowerLog{beta}:      (log x)^-beta, non-increasing
///  - InverseLogPow{beta}: rho(x) = x^((loglog x)^beta), log rho / log x non-decreasing
///  - ReciprocalLogLog{c}: 1 / (c loglog x), non-increasing
///  - ScaledLogLog{c}:     c loglog x, non-decreasing
///  - user expression with a declared monotonicity
class BoundaryFunction {
 public:
  struct SqrtLogLog { double c; };
  struct PowerLog { double beta; };
  struct InverseLogPow { double beta; };
  struct ReciprocalLogLog { double c; };
  struct ScaledLogLog { double c; };
  struct User { Expression expr; Monotone monotone; };
  using Family = std::variant<SqrtLogLog, PowerLog, InverseLogPow, ReciprocalLogLog, ScaledLogLog, User>;

  static BoundaryFunction sqrt_loglog(double c);
  static BoundaryFunction power_log(double beta);
  static BoundaryFunction inverse_log_pow(double beta);
  static BoundaryFunction reciprocal_loglog(double c);
  static BoundaryFunction scaled_loglog(double c);
  static BoundaryFunction expression(std::string_view text, Monotone monotone);

  LogNum eval(const Point& p) const;
  // log(log f); the rho-type family supplies it without forming log f.
  double log_log(const Point& p) const;
  Monotone monotone() const;
  std::string family_name() const;
  std::string params() const;
  const Family& family() const { return family_; }

 private:
  explicit BoundaryFunction(Family f) : family_(std::move(f)) {}
  Family family_;
};

enum class TestId {
  BesselUpper,          // ∫ a^{2ν+2} x^-1 e^{-a²/2} dx         UUC(Y)
  BesselLower,          // ∫ b(2^t)^{2ν} dt                     LLC(Y)
  FutureInfUpper,       // ∫ ψ^{2ν} x^-1 e^{-ψ²/2} dx           UUC(I)
  EscapeLower,          // ∫ x^-1 φ^-ν e^{-1/(2φ)} dx           LLC(A)
  GapUpper,             // ∫ x^-1 ψ^{2-2ν} e^{-ψ²/2} dx         UUC(Y - I)
  RangeLower,           // ∫ dx / (x log ρ)                     LLC(M - I)
  LocalTimeUpper,       // ∫ f x^-1 e^{-ν f} dx                 UUC(η(R, ∞))
  WalkUpper,            // Σ a(k)^{B+1} k^-1 e^{-a²/2}          UUC(X_n)
  WalkLower,            // Σ b(2^k)^{B-1}                       LLC(X_n)
  WalkFutureInfUpper,   // Σ ψ^{B-1} k^-1 e^{-ψ²/2}             UUC(J_n)
  WalkEscapeLower,      // Σ k^-1 φ^{-(B-1)/2} e^{-1/(2φ)}      LLC(G_n)
  WalkGapUpper,         // Σ k^-1 ψ^{3-B} e^{-ψ²/2}             UUC(X_n - J_n)
  WalkRangeLower,       // Σ 1 / (k log ρ(k))                   LLC(Q_n - J_n)
  WalkLocalTimeUpper,   // Σ f(k) k^-1 e^{-ν f(k)}              UUC(ξ(R, ∞))
};

std::string_view to_string(TestId id);
std::optional<TestId> parse_test_id(std::string_view s);
const std::vector<TestId>& all_tests();
bool is_series(TestId id);
Monotone required_monotone(TestId id);
// Continuous counterpart of a series test with B = 2ν + 1.
TestId continuous_counterpart(TestId id);

enum class Verdict { Converges, Diverges, Inconclusive };
std::string_view to_string(Verdict v);

struct Diagnostics {
  int scale = 0;  // deciding scale: 1 blocks in loglog x, 2 in logloglog x, 0 none
  std::vector<double> log_block_sums; // at the deciding (or last tried) scale
  std::vector<double> tail_ratios;    // last ten block ratios
  double log_partial_sum = 0.0;       // log of the summed blocks
  std::optional<double> direct_partial_sum;  // series tests: terms up to k = 1e5
};

struct TestVerdict {
  TestId id;
  Verdict verdict;
  Diagnostics diag;
};

struct TestOptions {
  double x0 = 16.0;         // start of the integral / series
  double ratio = 0.99;      // certified decay ratio
  int window = 10;          // consecutive blocks needed
  int blocks_scale1 = 100;
  int blocks_scale2 = 30;    // u up to e^30; beyond that phi is rounding noise
  double rel_tol = 1e-10;   // per-block quadrature
  long series_terms = 100000;
};

/// `param` is ν for the continuous tests and the walk local-time series,
/// B for the other series; ignored by the range tests.
TestVerdict evaluate_test(TestId id, const BoundaryFunction& f, double param,
                          const TestOptions& opt = {});

/// Class statement implied by a certified verdict; throws DomainError for
/// an inconclusive one.
std::string verdict_to_class(TestId id, Verdict v);

struct VerdictRow {
  TestId id;
  std::string family;
  std::string params;
  double param;
  Verdict verdict;
};

void write_verdict_csv(std::ostream& os, const std::vector<VerdictRow>& rows);

}  // namespace bwlab::classtest
