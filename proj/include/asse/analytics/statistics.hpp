#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace asse::analytics {

/// Linear interpolation between order statistics (Hyndman-Fan type 7):
/// h = (n - 1) p, Q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double p);

/// Fraction of samples <= x (right-continuous step function).
double ecdf_sorted(std::span<const double> sorted, double x);

struct Histogram {
  std::vector<double> edges;    ///< bins + 1 edges
  std::vector<double> density;  ///< integrates to 1
};

/// Equal-width histogram with Freedman-Diaconis width 2 IQR n^(-1/3) over [min, max].
Histogram freedman_diaconis_histogram(std::span<const double> sorted);

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  std::vector<double> probabilities;
  std::vector<double> quantiles;
  std::vector<double> cdf_x;  ///< uniform grid from min to max
  std::vector<double> cdf_y;
  Histogram pdf;
};

/// Requires at least two finite samples.
SampleSummary summarize(std::span<const double> samples, std::span<const double> p_list,
                        std::size_t cdf_points = 201);

/// ((N - 1) / N) * sum (z - zhat)^2 / sum (z - mean z)^2.
double validation_error(std::span<const double> truth, std::span<const double> predicted);

/// 100 (mu_ref - mu) / mu_ref.
double normalized_error_pct(double reference, double value);

struct ResponseReport {
  std::string name;
  SampleSummary summary;
  std::optional<double> e_val;
};

struct SurrogateReport {
  std::string method;  ///< MC, ASSE or SPCE
  std::size_t n_ed = 0;
  std::size_t n_val = 0;
  double wall_time_s = 0.0;
  std::vector<ResponseReport> responses;
};

struct ComparisonRow {
  std::string method;
  std::string response;
  std::string statistic;  ///< "mean" or "q<p>"
  double value = 0.0;
  std::optional<double> error_pct;  ///< empty on the baseline rows
};

/// Rows ordered baseline first, then the other reports in input order; within a
/// method by response, then mean followed by the quantiles in p-list order.
std::vector<ComparisonRow> compare_methods(const std::vector<SurrogateReport>& reports,
                                           const std::string& baseline_method = "MC");

}  // namespace asse::analytics
