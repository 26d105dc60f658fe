#include "bwlab/couple.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <variant>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"

namespace bwlab::couple {
namespace {

const walklaw::PowerFamily* as_power(const walklaw::WalkLaw& law) {
  return std::get_if<walklaw::PowerFamily>(&law.family());
}

std::vector<Level> suffix_min(const std::vector<Level>& x, Level tail) {
  std::vector<Level> out(x.size());
  Level m = tail;
  for (std::size_t i = x.size(); i-- > 0;) {
    m = std::min(m, x[i]);
    out[i] = m;
  }
  return out;
}

}  // namespace

std::string_view to_string(Case c) {
  switch (c) {
    case Case::I: return "i";
    case Case::II: return "ii";
    case Case::III: return "iii";
    case Case::IV: return "iv";
    case Case::Boundary: return "boundary";
  }
  return "?";
}

std::uint64_t CaseStats::steps() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

void CaseStats::merge(const CaseStats& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  violations += o.violations;
  bound_checked += o.bound_checked;
  max_scaled_gap = std::max(max_scaled_gap, o.max_scaled_gap);
}

JointChain::JointChain(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2)
    : e1_(law1), e2_(law2) {
  const auto* a = as_power(law1);
  const auto* b = as_power(law2);
  if (a && b && a->B == b->B && a->B > 0.0) {
    power_pair_ = true;
    B_ = a->B;
    C_ = std::max(a->C, b->C);
    gamma_ = std::min(a->gamma, b->gamma);
  }
}

JointChain::Table JointChain::table(Level j, Level k) {
  if (j < 0 || k < 0) throw DomainError("joint state must be nonnegative");
  const double u1 = e1_(j);
  const double u2 = e2_(k);
  // E = 1/2 + p, so comparing up-probabilities compares the p's; ties use
  // the first table.
  if (u1 >= u2) return {u2, u1 - u2, 1.0 - u1, true};
  return {u1, u2 - u1, 1.0 - u2, false};
}

std::optional<double> JointChain::gap_bound(Level m) const {
  if (!power_pair_ || m < 1) return std::nullopt;
  const double x = static_cast<double>(m);
  const double den = B_ / 4.0 - C_ * std::pow(x, 1.0 - gamma_);
  if (!(den > 0.0)) return std::nullopt;
  return 2.0 * C_ * std::pow(x, 2.0 - gamma_) / den;
}

Case JointChain::step(Level& j, Level& k, lab::RngStream& rng, CaseStats* stats) {
  const double u1 = e1_(j);
  const double u2 = e2_(k);
  Case c;
  if (j == 0 || k == 0) c = Case::Boundary;
  else if (u1 >= u2) c = (j >= k) ? Case::IV : Case::III;
  else c = (j <= k) ? Case::I : Case::II;

  // One uniform drives both coordinates; this realizes either table and
  // gives the deterministic up-move at 0.
  const double u = rng.uniform();
  const Level j0 = j, k0 = k;
  j += (u < u1) ? 1 : -1;
  k += (u < u2) ? 1 : -1;

  if (stats) {
    ++stats->counts[static_cast<std::size_t>(c)];
    const Level d0 = j0 - k0;
    const Level d1 = j - k;
    bool ok = (d1 - d0) % 2 == 0;
    switch (c) {
      case Case::II: ok = ok && -2 <= d1 && d1 <= d0; break;
      case Case::III: ok = ok && -2 <= -d1 && -d1 <= -d0; break;
      case Case::I:
      case Case::IV: {
        const Level gap = (c == Case::I) ? -d0 : d0;
        const Level m = std::min(j0, k0);
        ok = ok && gap >= 0;
        if (const auto bound = gap_bound(m)) {
          ++stats->bound_checked;
          ok = ok && static_cast<double>(gap) <= *bound;
        }
        if (power_pair_) {
          const double scaled = static_cast<double>(gap) / std::pow(static_cast<double>(m), 2.0 - gamma_);
          stats->max_scaled_gap = std::max(stats->max_scaled_gap, scaled);
        }
        break;
      }
      case Case::Boundary: break;
    }
    if (!ok) ++stats->violations;
  }
  return c;
}

CouplingTrace simulate_coupling(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2,
                                std::uint64_t n, lab::RngStream& rng,
                                const std::optional<Certification>& cert) {
  if (cert) {
    if (!cert->tail1 || !cert->tail2) throw DomainError("certification needs both return tails");
    if (!(cert->eps_ret > 0.0 && cert->eps_ret < 1.0)) throw DomainError("eps_ret must lie in (0, 1)");
  }
  JointChain chain(law1, law2);
  CouplingTrace tr;
  tr.seed = rng.seed_base();
  tr.stream = rng.stream_index();
  tr.j.reserve(n + 1);
  tr.k.reserve(n + 1);
  tr.cases.reserve(n);
  Level j = 0, k = 0;
  tr.j.push_back(0);
  tr.k.push_back(0);
  for (std::uint64_t s = 0; s < n; ++s) {
    tr.cases.push_back(chain.step(j, k, rng, &tr.stats));
    tr.j.push_back(j);
    tr.k.push_back(k);
  }
  if (!cert) return tr;

  // Keep the joint chain running until neither coordinate is likely to come
  // back below its minimum since step n.
  Level m1 = j, m2 = k;
  const std::uint64_t budget = cert->budget ? cert->budget : 100 * std::max<std::uint64_t>(n, 1);
  auto residual = [&](const walklaw::ReturnTail& t, Level x, Level m) {
    if (m <= 0) return 0.0;
    if (!t.closed_form() && x > t.max_level()) return 1.0;
    return t.return_probability(x, m - 1);
  };
  double r = 1.0;
  for (std::uint64_t s = 0;; ++s) {
    if ((s & 63) == 0) {
      r = residual(*cert->tail1, j, m1) + residual(*cert->tail2, k, m2);
      if (r < cert->eps_ret) break;
      if (s >= budget) return tr;
    }
    chain.step(j, k, rng);
    m1 = std::min(m1, j);
    m2 = std::min(m2, k);
  }
  tr.residual = r;
  tr.J1 = suffix_min(tr.j, m1);
  tr.J2 = suffix_min(tr.k, m2);
  return tr;
}

std::vector<double> running_gap(const CouplingTrace& trace) {
  std::vector<double> g(trace.j.size());
  Level m = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    m = std::max(m, std::abs(trace.j[i] - trace.k[i]));
    g[i] = static_cast<double>(m);
  }
  return g;
}

CouplingFit coupling_discrepancy(const walklaw::WalkLaw& law1, const walklaw::WalkLaw& law2,
                                 const std::vector<std::uint64_t>& grid, std::uint64_t seed_base,
                                 std::uint64_t seeds, std::uint64_t first_stream) {
  const auto* a = as_power(law1);
  const auto* b = as_power(law2);
  if (!a || !b) throw DomainError("coupling needs two power-family laws");
  if (a->B != b->B || !(a->B > 1.0)) throw DomainError("coupling needs a common B > 1");
  for (const auto* f : {a, b})
    if (!(f->gamma > 1.0 && f->gamma <= 2.0)) throw DomainError("coupling needs 1 < gamma <= 2");
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()) || grid.front() == 0)
    throw DomainError("n-grid must be increasing and positive");
  if (seeds < 2) throw DomainError("need at least two seeds");

  CouplingFit out;
  std::vector<double> sums(grid.size(), 0.0);
  JointChain chain(law1, law2);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    lab::RngStream rng(seed_base, first_stream + s);
    Level j = 0, k = 0, gap = 0;
    std::size_t g = 0;
    for (std::uint64_t step = 1; step <= grid.back(); ++step) {
      chain.step(j, k, rng, &out.stats);
      gap = std::max(gap, std::abs(j - k));
      if (step == grid[g]) sums[g++] += static_cast<double>(gap);
    }
    out.max_gap = std::max(out.max_gap, gap);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.n.push_back(static_cast<double>(grid[g]));
    out.mean.push_back(sums[g] / static_cast<double>(seeds));
  }
  // A zero mean has no logarithm; an identical pair is a flat fit.
  if (std::all_of(out.mean.begin(), out.mean.end(), [](double v) { return v > 0.0; })) {
    out.fit = lab::loglog_fit(out.n, out.mean);
  } else {
    out.fit.points = out.n.size();
  }
  return out;
}

ExtremaCoupling extrema_coupling(const CouplingTrace& trace) {
  if (trace.J1.empty() || trace.J2.empty()) throw CertificationError("future infima not certified");
  ExtremaCoupling e;
  const std::size_t n = trace.j.size();
  e.max_diff.resize(n);
  e.inf_diff.resize(n);
  Level q1 = 0, q2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    q1 = std::max(q1, trace.j[i]);
    q2 = std::max(q2, trace.k[i]);
    e.max_diff[i] = static_cast<double>(std::abs(q1 - q2));
    e.inf_diff[i] = static_cast<double>(std::abs(trace.J1[i] - trace.J2[i]));
  }
  return e;
}

void write_trace_csv(std::ostream& os, const CouplingTrace& trace) {
  lab::CsvWriter w(os, {"n", "j", "k", "case"});
  for (std::size_t i = 0; i < trace.j.size(); ++i) {
    w.cell(static_cast<std::uint64_t>(i)).cell(trace.j[i]).cell(trace.k[i]);
    w.cell(i < trace.cases.size() ? to_string(trace.cases[i]) : std::string_view{});
    w.row_end();
  }
}

}  // namespace bwlab::couple
