#include "bwlab/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bwlab/errors.hpp"
#include "bwlab/lab/csv.hpp"

namespace bwlab::embed {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Band {
  double lo;
  double hi;
};

// The walk at 0 or 1 can only step up; no lower barrier there.
Band band_for(Level x) {
  if (x <= 1) return {-kInf, static_cast<double>(x + 1)};
  return {static_cast<double>(x - 1), static_cast<double>(x + 1)};
}

// Walk future infimum after its last stop, given the host path's future
// infimum after the same point: every integer level it passes is visited.
Level walk_tail_infimum(Level x_last, double host_inf) {
  const auto c = static_cast<Level>(std::ceil(host_inf));
  return std::min(x_last, std::max<Level>(1, c));
}

std::vector<Level> suffix_min(const std::vector<Level>& x, Level tail) {
  std::vector<Level> j(x.size());
  Level m = tail;
  for (std::size_t k = x.size(); k-- > 0;) {
    m = std::min(m, x[k]);
    j[k] = m;
  }
  return j;
}

}  // namespace

Embedding embed(const besselsim::BesselPath& path, std::size_t count) {
  if (path.t.empty()) throw DomainError("empty path");
  if (path.y.front() >= 1.0) throw DomainError("embedding needs a start below 1");
  Embedding e;
  e.nu = path.nu;
  e.seed = path.seed;
  e.stream = path.stream;
  e.t.push_back(0.0);
  e.x.push_back(0);
  Band band = band_for(0);
  const std::size_t n = path.t.size();
  double m = path.y[0];
  std::size_t next_int = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, path.y[i]);
    while (next_int <= static_cast<std::size_t>(path.t.back()) &&
           static_cast<double>(next_int) <= path.t[i]) {
      const double tn = static_cast<double>(next_int);
      double v = path.y[i];
      if (i > 0 && tn < path.t[i]) {
        const double w = (tn - path.t[i - 1]) / (path.t[i] - path.t[i - 1]);
        v = path.y[i - 1] + w * (path.y[i] - path.y[i - 1]);
      }
      e.y_int.push_back(v);
      e.m_int.push_back(std::max(m, v));
      ++next_int;
    }
    if (i == 0) continue;
    double t0 = path.t[i - 1], y0 = path.y[i - 1];
    const double t1 = path.t[i], y1 = path.y[i];
    for (;;) {
      if (count > 0 && e.steps() >= count) break;
      double barrier;
      if (y1 >= band.hi) barrier = band.hi;
      else if (y1 <= band.lo) barrier = band.lo;
      else break;
      const double tc = t0 + (barrier - y0) / (y1 - y0) * (t1 - t0);
      const Level xb = static_cast<Level>(barrier);
      e.t.push_back(tc);
      e.x.push_back(xb);
      band = band_for(xb);
      t0 = tc;
      y0 = barrier;
    }
  }
  if (count > 0 && e.steps() < count) e.complete = false;
  if (path.future_infimum) {
    std::vector<double> suffix(n);
    double inf = *path.future_infimum;
    for (std::size_t i = n; i-- > 0;) {
      inf = std::min(inf, path.y[i]);
      suffix[i] = inf;
    }
    e.i_int.resize(e.y_int.size());
    for (std::size_t k = 0; k < e.y_int.size(); ++k) {
      const double tk = static_cast<double>(k);
      const auto it = std::lower_bound(path.t.begin(), path.t.end(), tk);
      const auto idx = static_cast<std::size_t>(it - path.t.begin());
      e.i_int[k] = std::min(e.y_int[k], idx < n ? suffix[idx] : *path.future_infimum);
    }
    // host infimum after the last stop
    const auto it = std::upper_bound(path.t.begin(), path.t.end(), e.t.back());
    const auto idx = static_cast<std::size_t>(it - path.t.begin());
    const double after = idx < n ? suffix[idx] : *path.future_infimum;
    e.j = suffix_min(e.x, walk_tail_infimum(e.x.back(), after));
  }
  return e;
}

Embedding embed_online(const specfun::BesselOrder& order, std::size_t n,
                       const besselsim::Scheme& scheme, lab::RngStream& rng) {
  Embedding e;
  e.nu = order.nu();
  e.seed = rng.seed_base();
  e.stream = rng.stream_index();
  e.t.reserve(n + 1);
  e.x.reserve(n + 1);
  e.y_int.reserve(n + 1);
  e.m_int.reserve(n + 1);
  e.t.push_back(0.0);
  e.x.push_back(0);
  e.y_int.push_back(0.0);
  e.m_int.push_back(0.0);

  besselsim::BesselStepper s(order, scheme, 0.0);
  double running_max = 0.0;
  std::vector<double> unit_min(1, 0.0);  // min of Y over [k, k+1]
  std::size_t next_int = 1;
  auto observe = [&](double t0, double, double, double y1) {
    running_max = std::max(running_max, y1);
    const auto k = static_cast<std::size_t>(t0);
    if (k >= unit_min.size()) unit_min.resize(k + 1, kInf);
    unit_min[k] = std::min(unit_min[k], y1);
    // the right end point also belongs to the next unit interval
    if (k + 1 >= unit_min.size()) unit_min.resize(k + 2, kInf);
  };

  while (e.x.size() <= n || next_int <= n) {
    const Band band = band_for(e.x.back());
    const auto ex = s.advance(band.lo, band.hi, static_cast<double>(next_int), rng, observe);
    if (ex == besselsim::Exit::None) {
      e.y_int.push_back(s.y());
      e.m_int.push_back(running_max);
      if (next_int >= unit_min.size()) unit_min.resize(next_int + 1, kInf);
      unit_min[next_int] = std::min(unit_min[next_int], s.y());
      ++next_int;
    } else {
      e.t.push_back(s.t());
      e.x.push_back(ex == besselsim::Exit::Upper ? e.x.back() + 1 : e.x.back() - 1);
    }
  }
  // Future infimum after the end time; per-unit minima give I(k).
  const double tail = besselsim::sample_future_infimum(e.nu, s.y(), rng);
  const auto end_unit = static_cast<std::size_t>(s.t());
  if (end_unit >= unit_min.size()) unit_min.resize(end_unit + 1, kInf);
  unit_min[end_unit] = std::min(unit_min[end_unit], s.y());
  e.i_int.assign(e.y_int.size(), 0.0);
  double inf = tail;
  for (std::size_t k = unit_min.size(); k-- > 0;) {
    inf = std::min(inf, unit_min[k]);
    if (k < e.i_int.size()) e.i_int[k] = std::min(inf, e.y_int[k]);
  }
  // After the last stop the host stays inside the current band until the end
  // time, so its infimum from the last stop on is min(band interior, tail).
  e.j = suffix_min(e.x, walk_tail_infimum(e.x.back(), tail));
  e.y_int.resize(n + 1);
  e.m_int.resize(n + 1);
  e.i_int.resize(n + 1);
  return e;
}

std::vector<double> running_discrepancy(const Embedding& e) {
  const std::size_t n = std::min(e.x.size(), e.y_int.size());
  std::vector<double> d(n);
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    m = std::max(m, std::abs(e.y_int[k] - static_cast<double>(e.x[k])));
    d[k] = m;
  }
  return d;
}

ExponentFit discrepancy_exponent(const std::vector<std::vector<double>>& running,
                                 const std::vector<std::size_t>& grid) {
  if (running.size() < 30) throw DomainError("discrepancy exponent needs at least 30 embeddings");
  if (grid.size() < 2 || grid.front() == 0 ||
      static_cast<double>(grid.back()) / static_cast<double>(grid.front()) < 999.5)
    throw DomainError("n-grid must span at least three decades");
  ExponentFit out;
  for (std::size_t n : grid) {
    double s = 0.0;
    for (const auto& r : running) {
      if (n >= r.size()) throw DomainError("embedding shorter than the n-grid");
      s += r[n];
    }
    out.n.push_back(static_cast<double>(n));
    out.mean.push_back(s / static_cast<double>(running.size()));
  }
  out.fit = lab::loglog_fit(out.n, out.mean);
  return out;
}

ExtremaProfile extrema_discrepancy(const Embedding& e) {
  if (e.i_int.empty() || e.j.empty()) throw CertificationError("future infima not settled");
  ExtremaProfile p;
  const std::size_t n = std::min({e.x.size(), e.m_int.size(), e.i_int.size(), e.j.size()});
  p.max_diff.resize(n);
  p.inf_diff.resize(n);
  Level q = 0;
  for (std::size_t k = 0; k < n; ++k) {
    q = std::max(q, e.x[k]);
    p.max_diff[k] = std::abs(e.m_int[k] - static_cast<double>(q));
    p.inf_diff[k] = std::abs(e.i_int[k] - static_cast<double>(e.j[k]));
  }
  return p;
}

void write_embedding_csv(std::ostream& os, const Embedding& e) {
  lab::CsvWriter w(os, {"n", "t_n", "X_n", "Y_n"});
  const std::size_t n = std::min(e.x.size(), e.y_int.size());
  for (std::size_t k = 0; k < n; ++k) {
    w.cell(static_cast<std::uint64_t>(k)).cell(e.t[k]).cell(e.x[k]).cell(e.y_int[k]);
    w.row_end();
  }
}

}  // namespace bwlab::embed
