#include "bwlab/lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bwlab/errors.hpp"

namespace bwlab::lab {

namespace {

void require_samples(std::size_t n, const char* what) {
  if (n < kMinSamples) {
    throw StatsError(std::string(what) + ": need at least 30 samples");
  }
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::span<const double> samples,
                         const std::function<double(double)>& cdf) {
  require_samples(samples.size(), "ks_one_sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d), s.size()};
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_samples(a.size(), "ks_two_sample");
  require_samples(b.size(), "ks_two_sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d), x.size() + y.size()};
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

double student_t_quantile(double prob, double dof) {
  return boost::math::quantile(boost::math::students_t(dof), prob);
}

double normal_quantile(double prob) {
  return boost::math::quantile(boost::math::normal(), prob);
}

ChiSquareResult chi_square_gof(std::span<const double> observed_counts,
                               std::span<const double> probs, double min_expected) {
  if (observed_counts.size() != probs.size() || probs.empty()) {
    throw StatsError("chi_square_gof: counts and probabilities must align");
  }
  const double total = std::accumulate(observed_counts.begin(), observed_counts.end(), 0.0);
  require_samples(static_cast<std::size_t>(total), "chi_square_gof");
  std::vector<double> obs(observed_counts.begin(), observed_counts.end());
  std::vector<double> exp(probs.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    exp[i] = probs[i] * total;
    mass += probs[i];
  }
  exp.back() += std::max(0.0, 1.0 - mass) * total;

  // merge from the right, then push any small leading bin forward
  std::vector<double> mo;
  std::vector<double> me;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t i = obs.size(); i-- > 0;) {
    acc_o += obs[i];
    acc_e += exp[i];
    if (acc_e >= min_expected) {
      mo.push_back(acc_o);
      me.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (me.empty()) throw StatsError("chi_square_gof: all bins below minimum expected count");
    mo.back() += acc_o;
    me.back() += acc_e;
  }
  if (me.size() < 2) throw StatsError("chi_square_gof: fewer than two bins after merging");
  double stat = 0.0;
  for (std::size_t i = 0; i < me.size(); ++i) {
    const double diff = mo[i] - me[i];
    stat += diff * diff / me[i];
  }
  const int dof = static_cast<int>(me.size()) - 1;
  return {stat, dof, chi_square_sf(stat, dof), me.size()};
}

ChiSquareResult chi_square_geometric(std::span<const std::uint64_t> samples, double p) {
  require_samples(samples.size(), "chi_square_geometric");
  if (!(p > 0.0) || p > 1.0) throw DomainError("chi_square_geometric: p must lie in (0, 1]");
  const double n = static_cast<double>(samples.size());
  // bins 1..K, where K is the last k with expected count >= 5, plus a tail bin
  std::vector<double> probs;
  double q = 1.0 - p;
  double pk = p;
  double cum = 0.0;
  while (pk * n >= 5.0 && probs.size() < 100000) {
    probs.push_back(pk);
    cum += pk;
    pk *= q;
  }
  if (probs.empty()) probs.push_back(p);
  probs.push_back(std::max(0.0, 1.0 - cum));
  std::vector<double> counts(probs.size(), 0.0);
  for (auto s : samples) {
    if (s == 0) throw StatsError("chi_square_geometric: sample outside support {1,2,...}");
    const std::size_t bin = std::min<std::size_t>(s - 1, probs.size() - 1);
    counts[bin] += 1.0;
  }
  if (p == 1.0) {
    // degenerate law: every sample must be 1
    const bool ok = counts[0] == n;
    return {ok ? 0.0 : n, 0, ok ? 1.0 : 0.0, 1};
  }
  return chi_square_gof(counts, probs);
}

RegressionResult ols(std::span<const double> x, std::span<const double> y, double level) {
  if (x.size() != y.size()) throw StatsError("ols: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw StatsError("ols: need at least three points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw StatsError("ols: degenerate design (all x equal)");
  RegressionResult r;
  r.points = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  // HC3: Var(b) = Σ (x_i - mx)² e_i² / (1 - h_i)² / sxx²
  double meat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    const double h = 1.0 / n + (x[i] - mx) * (x[i] - mx) / sxx;
    const double w = (x[i] - mx) * e / (1.0 - h);
    meat += w * w;
  }
  r.slope_se = std::sqrt(meat) / sxx;
  const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(n - 2));
  r.ci_low = r.slope - t * r.slope_se;
  r.ci_high = r.slope + t * r.slope_se;
  return r;
}

RegressionResult loglog_fit(std::span<const double> x, std::span<const double> y, double level) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw StatsError("loglog_fit: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return ols(lx, ly, level);
}

Summary summarize(std::span<const double> samples) {
  Summary s;
  s.n = samples.size();
  if (s.n == 0) throw StatsError("summarize: empty sample");
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : samples) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  s.mean = mean;
  s.variance = s.n > 1 ? m2 / static_cast<double>(s.n - 1) : 0.0;
  s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw StatsError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw StatsError("spearman: need >= 3 paired values");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double m = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - m) * (ry[i] - m);
    sxx += (rx[i] - m) * (rx[i] - m);
    syy += (ry[i] - m) * (ry[i] - m);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace bwlab::lab
