#include "bwlab/walksim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"

namespace bwlab::walksim {
namespace {

// Ψ(R) for R in [r_min, r_max] given first-hit and last-visit step indices for
// levels 0..q_end and the future infimum fi after the path end.
std::vector<std::int64_t> psi_from_visits(const std::vector<std::int64_t>& first_hit,
                                          const std::vector<std::int64_t>& last_visit,
                                          Level q_end, Level fi, Level r_min, Level r_max) {
  // holds(l): the walk never returns to l after first reaching l+1.
  // 1 = holds, 0 = fails, -1 = not determined by the observed path.
  auto holds = [&](Level l) -> int {
    if (l + 1 > q_end) return -1;
    if (l >= fi) return 0;  // revisited after the end, which is after κ(l+1)
    return last_visit[static_cast<std::size_t>(l)] < first_hit[static_cast<std::size_t>(l + 1)] ? 1 : 0;
  };
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(std::max<Level>(0, r_max - r_min + 1)));
  // next_fail[l]: first failing level >= l, scanning downward once.
  const Level hi = q_end;
  std::vector<std::int64_t> next_fail(static_cast<std::size_t>(hi) + 2, kPsiUnresolved);
  for (Level l = hi; l >= 0; --l) {
    const int h = holds(l);
    const auto i = static_cast<std::size_t>(l);
    if (h == 0) next_fail[i] = l;
    else if (h == 1) next_fail[i] = next_fail[i + 1];
    else next_fail[i] = kPsiUnresolved;
  }
  for (Level R = r_min; R <= r_max; ++R) {
    const Level start = R - 1;
    if (start > hi) {
      out.push_back(kPsiUnresolved);
      continue;
    }
    const std::int64_t f = next_fail[static_cast<std::size_t>(start)];
    out.push_back(f == kPsiUnresolved ? kPsiUnresolved : f - R - 1);
  }
  return out;
}

}  // namespace

WalkPath simulate_walk(const walklaw::WalkLaw& law, const StopRule& stop, lab::RngStream& rng,
                       const walklaw::ReturnTail* tail) {
  if (stop.kind == StopRule::Kind::Certified) {
    if (!tail) throw DomainError("certified stopping needs a return tail");
    if (!(stop.eps_ret > 0.0 && stop.eps_ret < 1.0)) throw DomainError("eps_ret must lie in (0, 1)");
    if (stop.level < 1) throw DomainError("certified level must be >= 1");
  }
  WalkPath path;
  path.seed = rng.seed_base();
  path.stream = rng.stream_index();
  walklaw::UpProbabilityTable e(law);
  Level x = 0;
  path.x.push_back(0);
  if (stop.kind == StopRule::Kind::FixedSteps) path.x.reserve(stop.steps + 1);

  auto done = [&]() {
    switch (stop.kind) {
      case StopRule::Kind::FixedSteps: return path.steps() >= stop.steps;
      case StopRule::Kind::LevelExceeded: return x > stop.level;
      case StopRule::Kind::Certified:
        return x > stop.level && tail->return_probability(x, stop.level) < stop.eps_ret;
    }
    return true;
  };

  while (!done()) {
    if (stop.kind != StopRule::Kind::FixedSteps && path.steps() >= stop.steps) {
      path.budget_exhausted = true;
      break;
    }
    x += (rng.uniform() < e(x)) ? 1 : -1;
    path.x.push_back(x);
  }
  if (stop.kind == StopRule::Kind::Certified && !path.budget_exhausted) {
    path.certified_level = stop.level;
    path.residual = tail->return_probability(x, stop.level);
  }
  if (tail && (tail->closed_form() || x <= tail->max_level()))
    path.future_infimum = tail->sample_future_infimum(x, rng);
  return path;
}

Level walk_position(walklaw::UpProbabilityTable& e, std::uint64_t n, lab::RngStream& rng) {
  Level x = 0;
  for (std::uint64_t k = 0; k < n; ++k) x += (rng.uniform() < e(x)) ? 1 : -1;
  return x;
}

std::uint64_t total_local_time(const WalkPath& path, Level R) {
  if (R < 0) throw DomainError("level must be nonnegative");
  const bool settled = (path.future_infimum && *path.future_infimum > R) || path.certified_level >= R;
  if (!settled) throw CertificationError("path end does not settle the local time at this level");
  return static_cast<std::uint64_t>(std::count(path.x.begin(), path.x.end(), R));
}

std::uint64_t sample_total_local_time(walklaw::UpProbabilityTable& e, const walklaw::ReturnTail& tail,
                                      Level R, Level splice_level, lab::RngStream& rng) {
  if (R < 1 || splice_level <= R) throw DomainError("need 1 <= R < splice_level");
  const double back = tail.return_probability(splice_level, R);
  std::uint64_t visits = 1;
  Level x = R;
  for (;;) {
    x += (rng.uniform() < e(x)) ? 1 : -1;
    if (x == R) {
      ++visits;
    } else if (x == splice_level) {
      if (!(rng.uniform() < back)) return visits;
      x = R;
      ++visits;
    }
  }
}

DerivedDiscrete derived_discrete(const WalkPath& path) {
  if (!path.future_infimum) throw CertificationError("future infimum after the path end is unknown");
  if (path.x.empty()) throw DomainError("empty path");
  const Level fi = *path.future_infimum;
  const std::size_t n = path.x.size();
  DerivedDiscrete d;
  d.Q.resize(n);
  d.J.resize(n);
  Level q = path.x[0];
  for (std::size_t k = 0; k < n; ++k) {
    q = std::max(q, path.x[k]);
    d.Q[k] = q;
  }
  Level j = fi;
  for (std::size_t k = n; k-- > 0;) {
    j = std::min(j, path.x[k]);
    d.J[k] = j;
  }
  const Level q_end = q;
  std::vector<std::int64_t> first_hit(static_cast<std::size_t>(q_end) + 1, -1);
  std::vector<std::int64_t> last_visit(static_cast<std::size_t>(q_end) + 1, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto l = static_cast<std::size_t>(path.x[k]);
    if (first_hit[l] < 0) first_hit[l] = static_cast<std::int64_t>(k);
    last_visit[l] = static_cast<std::int64_t>(k);
  }
  d.G.resize(static_cast<std::size_t>(std::max<Level>(fi, 0)));
  std::int64_t g = -1;
  for (Level l = 0; l < fi; ++l) {
    g = std::max(g, last_visit[static_cast<std::size_t>(l)]);
    d.G[static_cast<std::size_t>(l)] = g;
  }
  d.psi_first_level = 1;
  if (q_end >= 2) d.Psi = psi_from_visits(first_hit, last_visit, q_end, fi, 1, q_end - 1);
  return d;
}

std::vector<std::int64_t> escape_profile(const walklaw::WalkLaw& law, Level r_min, Level r_max,
                                         Level margin, lab::RngStream& rng,
                                         const walklaw::ReturnTail& tail) {
  if (r_min < 1 || r_max < r_min || margin < 2) throw DomainError("need 1 <= r_min <= r_max, margin >= 2");
  const Level top = r_max + margin;
  walklaw::UpProbabilityTable e(law, top + 1);
  std::vector<std::int64_t> first_hit(static_cast<std::size_t>(top) + 1, -1);
  std::vector<std::int64_t> last_visit(static_cast<std::size_t>(top) + 1, -1);
  first_hit[0] = 0;
  last_visit[0] = 0;
  Level x = 0, q = 0;
  std::int64_t step = 0;
  while (x < top) {
    x += (rng.uniform() < e(x)) ? 1 : -1;
    ++step;
    last_visit[static_cast<std::size_t>(x)] = step;
    if (x > q) {
      q = x;
      first_hit[static_cast<std::size_t>(x)] = step;
    }
  }
  const Level fi = tail.sample_future_infimum(top, rng);
  return psi_from_visits(first_hit, last_visit, top, fi, r_min, r_max);
}

std::vector<double> sample_limit_law(const walklaw::WalkLaw& law, std::uint64_t n,
                                     std::uint64_t seed_base, std::uint64_t first_stream,
                                     std::uint64_t count) {
  if (n == 0) throw DomainError("n must be positive");
  walklaw::UpProbabilityTable e(law, static_cast<Level>(std::min<std::uint64_t>(n, 1u << 20)) + 1);
  std::vector<double> out;
  out.reserve(count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::uint64_t s = 0; s < count; ++s) {
    lab::RngStream rng(seed_base, first_stream + s);
    out.push_back(static_cast<double>(walk_position(e, n, rng)) * scale);
  }
  return out;
}

double limit_density(double B, double x) {
  if (!(B > -1.0)) throw DomainError("limit law needs B > -1");
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * (B + 1.0);
  return std::exp(B * std::log(x) - 0.5 * x * x - (k - 1.0) * std::log(2.0) - std::lgamma(k));
}

double limit_cdf(double B, double x) {
  if (!(B > -1.0)) throw DomainError("limit law needs B > -1");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * (B + 1.0), 0.5 * x * x);
}

void write_path_csv(std::ostream& os, const WalkPath& path) {
  lab::CsvWriter w(os, {"step", "position"});
  for (std::size_t k = 0; k < path.x.size(); ++k) {
    w.cell(static_cast<std::uint64_t>(k)).cell(path.x[k]);
    w.row_end();
  }
}

void write_derived_csv(std::ostream& os, const DerivedDiscrete& d) {
  lab::CsvWriter w(os, {"step", "Q", "J"});
  for (std::size_t k = 0; k < d.Q.size(); ++k) {
    w.cell(static_cast<std::uint64_t>(k)).cell(d.Q[k]).cell(d.J[k]);
    w.row_end();
  }
}

void write_psi_csv(std::ostream& os, const DerivedDiscrete& d) {
  lab::CsvWriter w(os, {"R", "Psi"});
  for (std::size_t i = 0; i < d.Psi.size(); ++i) {
    w.cell(d.psi_first_level + static_cast<Level>(i));
    if (d.Psi[i] == kPsiUnresolved) w.cell("inf"); else w.cell(d.Psi[i]);
    w.row_end();
  }
}

}  // namespace bwlab::walksim
