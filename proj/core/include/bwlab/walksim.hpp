#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "bwlab/lab/rng.hpp"
#include "bwlab/walklaw.hpp"

namespace bwlab::walksim {

using walklaw::Level;

struct StopRule {
  enum class Kind {
    FixedSteps,     // exactly `steps` steps
    LevelExceeded,  // first time X > level
    Certified,      // first time return_probability(X -> level) < eps_ret
  };
  Kind kind = Kind::FixedSteps;
  std::uint64_t steps = 0;  // FixedSteps: n; otherwise the step budget
  Level level = 0;
  double eps_ret = 1e-6;

  static StopRule fixed(std::uint64_t n) { return {Kind::FixedSteps, n, 0, 0.0}; }
  static StopRule level_exceeded(Level L, std::uint64_t budget) {
    return {Kind::LevelExceeded, budget, L, 0.0};
  }
  static StopRule certified(Level R, double eps, std::uint64_t budget) {
    return {Kind::Certified, budget, R, eps};
  }
};

struct WalkPath {
  std::vector<Level> x;  // X_0 = 0, X_1, ..., X_n
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool budget_exhausted = false;
  // inf_{k >= n} X_k of the infinite continuation, drawn exactly from its law
  // (only when a ReturnTail was supplied).
  std::optional<Level> future_infimum;
  // Certified rule: levels <= certified_level are revisited with probability
  // at most `residual`.
  Level certified_level = -1;
  double residual = 1.0;

  std::uint64_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

/// One uniform per step against E_{X}. `tail` resolves the future infimum
/// after the stop and is required for StopRule::Certified.
WalkPath simulate_walk(const walklaw::WalkLaw& law, const StopRule& stop, lab::RngStream& rng,
                       const walklaw::ReturnTail* tail = nullptr);

// Position after n steps from 0, without storing the path.
Level walk_position(walklaw::UpProbabilityTable& e, std::uint64_t n, lab::RngStream& rng);

/// ξ(R, ∞) from a stored path; CertificationError unless the path end shows
/// no later visit to R (future infimum above R, or R within the certified range).
std::uint64_t total_local_time(const WalkPath& path, Level R);

/// Exact draw of ξ(R, ∞): the walk is started at its first arrival in R and
/// simulated; on reaching `splice_level` it returns to R with the exact
/// probability return_probability(splice_level -> R), otherwise it escapes.
std::uint64_t sample_total_local_time(walklaw::UpProbabilityTable& e, const walklaw::ReturnTail& tail,
                                      Level R, Level splice_level, lab::RngStream& rng);

inline constexpr std::int64_t kPsiUnresolved = std::numeric_limits<std::int64_t>::max();

struct DerivedDiscrete {
  std::vector<Level> Q;             // running maximum, per step
  std::vector<Level> J;             // future infimum, per step
  std::vector<std::int64_t> G;      // G[l] = sup{k : X_k <= l}, for l < future infimum
  Level psi_first_level = 1;        // Psi[i] is Ψ(psi_first_level + i)
  std::vector<std::int64_t> Psi;    // kPsiUnresolved beyond the observed range
};

/// Requires `path.future_infimum`. Ψ(R) is the largest ψ with
/// κ*(R+j) < κ(R+j+1) for j = -1..ψ, i.e. the first failing j minus one.
DerivedDiscrete derived_discrete(const WalkPath& path);

/// Ψ(R) for R in [r_min, r_max] from one long trajectory, run until it first
/// reaches r_max + margin; the exact future infimum then settles every event
/// (a level at or above it is revisited after the end).
std::vector<std::int64_t> escape_profile(const walklaw::WalkLaw& law, Level r_min, Level r_max,
                                         Level margin, lab::RngStream& rng,
                                         const walklaw::ReturnTail& tail);

// X_n / sqrt(n) for streams first_stream .. first_stream + count - 1.
std::vector<double> sample_limit_law(const walklaw::WalkLaw& law, std::uint64_t n,
                                     std::uint64_t seed_base, std::uint64_t first_stream,
                                     std::uint64_t count);

// Density x^B e^{-x²/2} / (2^{(B-1)/2} Γ((B+1)/2)) on x > 0 and its CDF.
double limit_density(double B, double x);
double limit_cdf(double B, double x);

void write_path_csv(std::ostream& os, const WalkPath& path);
void write_derived_csv(std::ostream& os, const DerivedDiscrete& d);
void write_psi_csv(std::ostream& os, const DerivedDiscrete& d);

}  // namespace bwlab::walksim
