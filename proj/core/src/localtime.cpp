#include "bwlab/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"
#include "bwlab/lab/stats.hpp"

namespace bwlab::localtime {

ExcursionLaw excursion_law(double nu, Level R) {
  if (!(nu > 0.0)) throw DomainError("order must be positive");
  if (R < 2) throw DomainError("excursion law needs R >= 2");
  const double r = static_cast<double>(R);
  const double h = 1.0 / r;
  // A = R^{-2ν} a, B = R^{-2ν} b
  const double a = std::expm1(-2.0 * nu * std::log1p(-h));
  const double b = -std::expm1(-2.0 * nu * std::log1p(h));
  ExcursionLaw law;
  law.nu = nu;
  law.R = R;
  const double scale = std::exp(-2.0 * nu * std::log(r));
  law.A = scale * a;
  law.B = scale * b;
  law.theta = r * a * b / (nu * (a + b));
  law.p_star = walklaw::local_time_law(walklaw::WalkLaw::bessel(nu), R).p_star;
  const double p_direct = a * b / (a + b);
  if (std::abs(law.p_star - p_direct) > 1e-12)
    throw std::logic_error("excursion law disagrees with the walk local time law");
  return law;
}

JointLocalTime sample_joint_local_time(const ExcursionLaw& law, lab::RngStream& rng) {
  JointLocalTime out;
  out.xi = rng.geometric(law.p_star);
  const double excursions =
      out.xi > 1 ? rng.gamma(static_cast<double>(out.xi - 1), law.theta) : 0.0;
  out.eta = excursions + rng.exponential(law.theta);
  return out;
}

std::vector<Level> log_grid(Level lo, Level hi, int per_decade) {
  if (lo < 1 || hi < lo || per_decade < 1) throw DomainError("need 1 <= lo <= hi, per_decade >= 1");
  std::set<Level> pts;
  const double l0 = std::log10(static_cast<double>(lo));
  const double l1 = std::log10(static_cast<double>(hi));
  const int n = static_cast<int>(std::ceil((l1 - l0) * per_decade));
  for (int i = 0; i <= n; ++i) {
    const double v = std::pow(10.0, l0 + (l1 - l0) * (n == 0 ? 0.0 : double(i) / n));
    pts.insert(std::clamp<Level>(std::llround(v), lo, hi));
  }
  return {pts.begin(), pts.end()};
}

std::vector<DiscrepancyRow> discrepancy_profile(double nu, const std::vector<Level>& grid,
                                                std::uint64_t samples, std::uint64_t seed_base,
                                                std::uint64_t first_stream) {
  if (samples < lab::kMinSamples) throw DomainError("too few samples per level");
  std::vector<DiscrepancyRow> rows;
  rows.reserve(grid.size());
  std::vector<double> d(samples);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ExcursionLaw law = excursion_law(nu, grid[i]);
    lab::RngStream rng(seed_base, first_stream + i);
    double sum = 0.0;
    for (auto& v : d) {
      const auto s = sample_joint_local_time(law, rng);
      v = std::abs(static_cast<double>(s.xi) - s.eta);
      sum += v;
    }
    DiscrepancyRow row;
    row.R = grid[i];
    row.mean = sum / static_cast<double>(samples);
    row.q50 = lab::quantile(d, 0.5);
    row.q99 = lab::quantile(d, 0.99);
    const double r = static_cast<double>(grid[i]);
    row.scaled_q99 = row.q99 / (std::sqrt(r) * (1.0 + std::log(r)));
    rows.push_back(row);
  }
  return rows;
}

void write_profile_csv(std::ostream& os, const std::vector<DiscrepancyRow>& rows) {
  lab::CsvWriter w(os, {"R", "mean", "q50", "q99", "scaled_q99"});
  for (const auto& r : rows) {
    w.cell(r.R).cell(r.mean).cell(r.q50).cell(r.q99).cell(r.scaled_q99);
    w.row_end();
  }
}

}  // namespace bwlab::localtime
