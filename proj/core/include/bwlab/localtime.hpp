#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bwlab/lab/rng.hpp"
#include "bwlab/walklaw.hpp"

namespace bwlab::localtime {

using walklaw::Level;

/// Excursion decomposition at level R: ξ(R,∞) ~ Geometric(p*), and
/// η(R,∞) is a sum of ξ independent Exponential(θ) contributions.
struct ExcursionLaw {
  double nu = 0.0;
  Level R = 0;
  double A = 0.0;  // (R-1)^{-2ν} - R^{-2ν}
  double B = 0.0;  // R^{-2ν} - (R+1)^{-2ν}
  double theta = 0.0;
  double p_star = 0.0;
};

/// θ = R^{2ν+1} A B / (ν (A + B)), evaluated with the R^{-2ν} factor removed
/// (A and B themselves may underflow for large ν log R). θ/p* = R/ν.
ExcursionLaw excursion_law(double nu, Level R);

struct JointLocalTime {
  std::uint64_t xi = 0;
  double eta = 0.0;
};

// ξ ~ Geometric(p*); η = Gamma(ξ - 1, θ) + an independent Exponential(θ).
JointLocalTime sample_joint_local_time(const ExcursionLaw& law, lab::RngStream& rng);

struct DiscrepancyRow {
  Level R = 0;
  double mean = 0.0;  // E|ξ - η|
  double q50 = 0.0;
  double q99 = 0.0;
  double scaled_q99 = 0.0;  // q99 / (√R (1 + log R))
};

// Log-spaced integer grid from lo to hi inclusive, `per_decade` points per decade.
std::vector<Level> log_grid(Level lo, Level hi, int per_decade);

/// Per-level statistics of |ξ - η| from `samples` joint draws at each R; the
/// draws at grid index i use stream first_stream + i.
std::vector<DiscrepancyRow> discrepancy_profile(double nu, const std::vector<Level>& grid,
                                                std::uint64_t samples, std::uint64_t seed_base,
                                                std::uint64_t first_stream = 0);

void write_profile_csv(std::ostream& os, const std::vector<DiscrepancyRow>& rows);

}  // namespace bwlab::localtime
