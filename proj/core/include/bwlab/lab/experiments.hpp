#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "bwlab/classtest.hpp"
#include "bwlab/lab/config.hpp"
#include "bwlab/lab/report.hpp"

namespace bwlab::lab {

/// Runs fn(0) .. fn(count - 1) on up to `threads` threads. Each index owns
/// its output slot, so results do not depend on the thread count. The
/// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Runs the named experiment. Thresholds come from `thresholds` with the
/// config's own "thresholds" entries taking precedence. Module errors are
/// rethrown with the experiment id prepended. Nothing is written to disk.
///
///  exp-geometric    law, R, trajectories, repetitions: chi-square GOF of ξ(R, ∞)
///                   against Geometric(p*) per repetition; pooled mean vs 1/p*
///  exp-exponential  nu, R, trajectories: exact excursion sampler and band
///                   occupation estimator vs Exponential(R/ν), and vs each other
///  exp-embed        nu, n, trajectories: slope of log E max|Y(m) - X_m| vs log n
///  exp-localtime    nu, R, trajectories: slope of log E|ξ - η| vs log R
///  exp-couple       law, law2, n, trajectories: slope of log E max|j - k| vs log n
///  exp-escape       law, R (contiguous), trajectories: running max of Ψ(R)/loglog R
///  exp-limitlaw     law, n (first entry), trajectories: KS of X_n/√n vs the limit density
///  exp-classtable   classtable, nu: verdict grid against the analytic flips
StatReport run_experiment(const ExperimentConfig& config, const Thresholds& thresholds,
                          int threads = 1);

/// Known convergence of the built-in families, or nothing at a critical
/// parameter or for combinations without a closed-form answer. `nu` is the
/// order of the continuous counterpart.
std::optional<classtest::Verdict> analytic_verdict(classtest::TestId id,
                                                   const classtest::BoundaryFunction& f,
                                                   double nu);

}  // namespace bwlab::lab
