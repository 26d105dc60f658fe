#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bwlab::lab {

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t bins = 0;
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // HC3 heteroskedasticity-robust
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;

  bool ci_contains(double v) const { return ci_low <= v && v <= ci_high; }
};

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::size_t n = 0;
};

inline constexpr std::size_t kMinSamples = 30;

// Survival function of the Kolmogorov distribution, Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}.
double kolmogorov_q(double lambda);

// One-sample KS against a continuous CDF. p-value uses Stephens' finite-n
// correction λ = (√n + 0.12 + 0.11/√n) D.
TestResult ks_one_sample(std::span<const double> samples,
                         const std::function<double(double)>& cdf);

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Pearson chi-square against bin probabilities. Adjacent bins are merged from
// the right until every bin has expected count >= min_expected; the leftover
// mass (1 - Σ probs) is folded into the last bin.
ChiSquareResult chi_square_gof(std::span<const double> observed_counts,
                               std::span<const double> probs,
                               double min_expected = 5.0);

// Chi-square GOF of integer samples (support 1, 2, ...) against Geometric(p).
ChiSquareResult chi_square_geometric(std::span<const std::uint64_t> samples, double p);

double chi_square_sf(double statistic, double dof);
double student_t_quantile(double prob, double dof);
double normal_quantile(double prob);

// Ordinary least squares with HC3 standard error and a Student-t CI at `level`.
RegressionResult ols(std::span<const double> x, std::span<const double> y,
                     double level = 0.95);
// OLS of log y on log x.
RegressionResult loglog_fit(std::span<const double> x, std::span<const double> y,
                            double level = 0.95);

Summary summarize(std::span<const double> samples);
// Linear-interpolation quantile (type 7).
double quantile(std::vector<double> values, double q);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace bwlab::lab
