#include "asse/analytics/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "asse/errors.hpp"

namespace asse::analytics {

double quantile_sorted(std::span<const double> x, double p) {
  if (x.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(x.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

double ecdf_sorted(std::span<const double> x, double v) {
  if (x.empty()) throw InsufficientDataError("ecdf of an empty sample");
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  return static_cast<double>(it - x.begin()) / static_cast<double>(x.size());
}

Histogram freedman_diaconis_histogram(std::span<const double> x) {
  if (x.size() < 2) throw InsufficientDataError("histogram needs at least two samples");
  const double lo = x.front(), hi = x.back();
  const double n = static_cast<double>(x.size());
  Histogram h;
  if (hi == lo) {
    h.edges = {lo - 0.5, lo + 0.5};
    h.density = {1.0};
    return h;
  }
  const double iqr = quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
  std::size_t bins = 1;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(n);
    bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 10000.0));
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  std::vector<std::size_t> count(bins, 0);
  for (double v : x) ++count[std::min(bins - 1, static_cast<std::size_t>((v - lo) / width))];
  h.density.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) h.density[b] = static_cast<double>(count[b]) / (n * width);
  return h;
}

SampleSummary summarize(std::span<const double> samples, std::span<const double> p_list, std::size_t cdf_points) {
  if (samples.size() < 2) throw InsufficientDataError("summarize needs at least two samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw DomainError("summarize: non-finite sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  SampleSummary s;
  s.n = x.size();
  const double n = static_cast<double>(s.n);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / (n - 1.0);
  s.probabilities.assign(p_list.begin(), p_list.end());
  for (double p : p_list) s.quantiles.push_back(quantile_sorted(x, p));
  cdf_points = std::max<std::size_t>(cdf_points, 2);
  for (std::size_t k = 0; k < cdf_points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(cdf_points - 1);
    const double v = k + 1 == cdf_points ? x.back() : x.front() + t * (x.back() - x.front());
    s.cdf_x.push_back(v);
    s.cdf_y.push_back(ecdf_sorted(x, v));
  }
  s.pdf = freedman_diaconis_histogram(x);
  return s;
}

double validation_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw ShapeError("validation_error: truth and predictions differ in length");
  if (truth.size() < 2) throw InsufficientDataError("validation_error needs at least two samples");
  const double n = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    num += (truth[m] - pred[m]) * (truth[m] - pred[m]);
    den += (truth[m] - mean) * (truth[m] - mean);
  }
  if (!(den > 0.0)) throw DegenerateDataError("validation_error: constant truth responses");
  return (n - 1.0) / n * num / den;
}

double normalized_error_pct(double reference, double value) {
  if (reference == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (reference - value) / reference;
}

namespace {

std::string quantile_label(double p) {
  std::ostringstream os;
  os << 'q' << p;
  return os.str();
}

}  // namespace

std::vector<ComparisonRow> compare_methods(const std::vector<SurrogateReport>& reports,
                                           const std::string& baseline_method) {
  const auto base = std::find_if(reports.begin(), reports.end(),
                                 [&](const SurrogateReport& r) { return r.method == baseline_method; });
  if (base == reports.end()) throw DomainError("compare_methods: baseline report '" + baseline_method + "' missing");
  for (const auto& r : reports) {
    if (r.responses.size() != base->responses.size())
      throw ShapeError("compare_methods: report '" + r.method + "' covers different responses");
    for (std::size_t k = 0; k < r.responses.size(); ++k)
      if (r.responses[k].name != base->responses[k].name ||
          r.responses[k].summary.probabilities != base->responses[k].summary.probabilities)
        throw ShapeError("compare_methods: report '" + r.method + "' covers different responses");
  }

  std::vector<ComparisonRow> rows;
  auto emit = [&](const SurrogateReport& r, bool is_base) {
    for (std::size_t k = 0; k < r.responses.size(); ++k) {
      const auto& s = r.responses[k].summary;
      const auto& ref = base->responses[k].summary;
      ComparisonRow row{r.method, r.responses[k].name, "mean", s.mean, std::nullopt};
      if (!is_base) row.error_pct = normalized_error_pct(ref.mean, s.mean);
      rows.push_back(row);
      for (std::size_t q = 0; q < s.quantiles.size(); ++q) {
        ComparisonRow qr{r.method, r.responses[k].name, quantile_label(s.probabilities[q]), s.quantiles[q],
                         std::nullopt};
        if (!is_base) qr.error_pct = normalized_error_pct(ref.quantiles[q], s.quantiles[q]);
        rows.push_back(qr);
      }
    }
  };
  emit(*base, true);
  for (auto it = reports.begin(); it != reports.end(); ++it)
    if (it != base) emit(*it, false);
  return rows;
}

}  // namespace asse::analytics
