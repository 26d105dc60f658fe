#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "bwlab/lab/rng.hpp"
#include "bwlab/lab/stats.hpp"
#include "bwlab/walklaw.hpp"

namespace bwlab::couple {

using walklaw::Level;

// I..IV as in the coupling argument; Boundary: some coordinate at 0.
enum class Case : std::uint8_t { I, II, III, IV, Boundary };
std::string_view to_string(Case c);

struct CaseStats {
  std::array<std::uint64_t, 5> counts{};
  std::uint64_t violations = 0;     // failed per-step inequalities
  std::uint64_t bound_checked = 0;  // steps where the (i)/(iv) gap bound applied
  double max_scaled_gap = 0.0;      // max |j-k| / min(j,k)^{2-γ} over cases (i)/(iv)

  std::uint64_t steps() const;
  void merge(const CaseStats& o);
};

/// Two nearest-neighbour walks driven by one uniform per step. If
/// p_j^(1) >= p_k^(2) the moves (+1,+1), (+1,-1), (-1,-1) have probabilities
/// 1/2 + p_k^(2), p_j^(1) - p_k^(2), 1/2 - p_j^(1); otherwise the mirror table.
/// A coordinate at 0 steps up and the other keeps its own marginal.
class JointChain {
 public:
  JointChain(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2);

  // Advances (j, k) one step; inequalities are checked into `stats` when given.
  Case step(Level& j, Level& k, lab::RngStream& rng, CaseStats* stats = nullptr);

  // (P(+1,+1), P(mixed), P(-1,-1)); the mixed move is (+1,-1) when the first
  // table applies (returned flag true), else (-1,+1).
  struct Table {
    double up;
    double mixed;
    double down;
    bool first;
  };
  Table table(Level j, Level k);

  // Gap bound 2C m^{2-γ} / (B/4 - C m^{1-γ}) in cases (i)/(iv); empty when the
  // laws are not a common-B power pair or the denominator is not positive.
  std::optional<double> gap_bound(Level m) const;

 private:
  walklaw::UpProbabilityTable e1_;
  walklaw::UpProbabilityTable e2_;
  bool power_pair_ = false;
  double B_ = 0.0;
  double C_ = 0.0;
  double gamma_ = 0.0;
};

struct CouplingTrace {
  std::vector<Level> j;
  std::vector<Level> k;
  std::vector<Case> cases;  // cases[n]: label of the state before step n+1
  CaseStats stats;
  // Future infima J_n of each coordinate; empty when not certified.
  std::vector<Level> J1;
  std::vector<Level> J2;
  double residual = 1.0;  // bound on the probability that either J is wrong
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t steps() const { return j.empty() ? 0 : j.size() - 1; }
};

struct Certification {
  const walklaw::ReturnTail* tail1;
  const walklaw::ReturnTail* tail2;
  double eps_ret = 1e-6;
  std::uint64_t budget = 0;  // extra joint steps allowed; 0 means 100 n
};

CouplingTrace simulate_coupling(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2,
                                std::uint64_t n, lab::RngStream& rng,
                                const std::optional<Certification>& cert = std::nullopt);

// max_{m <= n} |j_m - k_m|
std::vector<double> running_gap(const CouplingTrace& trace);

struct CouplingFit {
  std::vector<double> n;
  std::vector<double> mean;  // mean over seeds of max_{m<=n} |j_m - k_m|
  lab::RegressionResult fit;
  Level max_gap = 0;         // over all n and seeds
  CaseStats stats;
};

/// Both laws must be power families with a common B > 1 and 1 < γ <= 2.
/// Seed s uses stream first_stream + s; trajectories are not stored.
CouplingFit coupling_discrepancy(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2,
                                 const std::vector<std::uint64_t>& grid, std::uint64_t seed_base,
                                 std::uint64_t seeds, std::uint64_t first_stream = 0);

struct ExtremaCoupling {
  std::vector<double> max_diff;  // |Q^(1)_n - Q^(2)_n|
  std::vector<double> inf_diff;  // |J^(1)_n - J^(2)_n|
};

ExtremaCoupling extrema_coupling(const CouplingTrace& trace);

void write_trace_csv(std::ostream& os, const CouplingTrace& trace);

}  // namespace bwlab::couple
