#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bwlab/besselsim.hpp"
#include "bwlab/lab/stats.hpp"
#include "bwlab/walklaw.hpp"

namespace bwlab::embed {

using walklaw::Level;

/// Walk read off a Bessel path at stopping times: t_1 = first hit of 1,
/// t_2 = first hit of 2 after t_1, then t_n = first exit of (X_{n-1} - 1,
/// X_{n-1} + 1) after t_{n-1}. The walk has the Bessel-derived law.
struct Embedding {
  double nu = 0.0;
  std::vector<double> t;      // t_0 = 0 < t_1 < ...
  std::vector<Level> x;       // X_n = Y(t_n)
  std::vector<double> y_int;  // Y(n), n = 0, 1, ...
  std::vector<double> m_int;  // max_{s <= n} Y(s), at grid resolution
  std::vector<double> i_int;  // inf_{s >= n} Y(s); empty when not settled
  std::vector<Level> j;       // J_n = inf_{k >= n} X_k; empty when not settled
  bool complete = true;       // false: horizon reached before the requested count
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

/// Embeds by scanning a stored path; crossings between grid points are
/// located by linear interpolation. `count` = 0 embeds as far as the path goes.
Embedding embed(const besselsim::BesselPath& path, std::size_t count = 0);

/// Simulates the host path while embedding, until n walk steps and time n
/// are both reached; crossings use the stepper's bridge timing. The future
/// infimum after the end is drawn exactly, which settles I and J.
Embedding embed_online(const specfun::BesselOrder& order, std::size_t n,
                       const besselsim::Scheme& scheme, lab::RngStream& rng);

// D(m) = max_{k <= m} |Y(k) - X_k|.
std::vector<double> running_discrepancy(const Embedding& e);

struct ExponentFit {
  std::vector<double> n;
  std::vector<double> mean;  // mean over embeddings of D(n)
  lab::RegressionResult fit; // log mean vs log n
};

/// Needs >= 30 embeddings and a grid spanning >= 3 decades.
ExponentFit discrepancy_exponent(const std::vector<std::vector<double>>& running,
                                 const std::vector<std::size_t>& grid);

struct ExtremaProfile {
  std::vector<double> max_diff;  // |M(n) - Q_n|
  std::vector<double> inf_diff;  // |I(n) - J_n|
};

ExtremaProfile extrema_discrepancy(const Embedding& e);

void write_embedding_csv(std::ostream& os, const Embedding& e);

}  // namespace bwlab::embed
