#include "exobench/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace exobench {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DomainError(fmt::format("{}: value {} is not finite", what, i));
  }
}

}  // namespace

RangeStats range_stats(const std::vector<double>& series, std::string units) {
  if (series.empty()) throw DomainError("range_stats: empty series");
  require_finite(series, "range_stats");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return {*lo, *hi, *hi - *lo, std::move(units)};
}

AggregateStats aggregate(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw DomainError(fmt::format("aggregate needs n >= 2, got {}", values.size()));
  }
  require_finite(values, "aggregate");
  return {mean_of(values), std::sqrt(sample_variance(values)), static_cast<int>(values.size())};
}

ReliabilityBand reliability_band(double alpha) {
  if (std::isnan(alpha)) throw DomainError("reliability band of NaN");
  if (alpha < 0.60) return ReliabilityBand::Fair;
  if (alpha < 0.70) return ReliabilityBand::Moderate;
  if (alpha < 0.80) return ReliabilityBand::Acceptable;
  if (alpha < 0.90) return ReliabilityBand::Good;
  return ReliabilityBand::Excellent;
}

std::string_view band_name(ReliabilityBand band) {
  switch (band) {
    case ReliabilityBand::Fair: return "fair";
    case ReliabilityBand::Moderate: return "moderate";
    case ReliabilityBand::Acceptable: return "acceptable";
    case ReliabilityBand::Good: return "good";
    case ReliabilityBand::Excellent: return "excellent";
  }
  return "fair";
}

ReliabilityResult reliability_alpha(const std::vector<double>& trial_a,
                                    const std::vector<double>& trial_b,
                                    std::pair<std::string, std::string> labels) {
  if (trial_a.size() != trial_b.size()) {
    throw DomainError(fmt::format("reliability: trial lengths differ ({} vs {})", trial_a.size(),
                                  trial_b.size()));
  }
  if (trial_a.size() < 3) throw DomainError("reliability needs at least 3 paired values");
  require_finite(trial_a, "reliability trial a");
  require_finite(trial_b, "reliability trial b");

  std::vector<double> sums(trial_a.size());
  for (size_t i = 0; i < sums.size(); ++i) sums[i] = trial_a[i] + trial_b[i];
  const double var_total = sample_variance(sums);
  if (!(var_total > 0.0)) throw DomainError("reliability: the summed scores have zero variance");
  const double alpha = 2.0 * (1.0 - (sample_variance(trial_a) + sample_variance(trial_b)) / var_total);
  return {alpha, reliability_band(alpha), std::move(labels)};
}

double percent_difference(double reference, double value) {
  if (reference == 0.0) throw DomainError("percent difference against a zero reference");
  return 100.0 * std::abs(value - reference) / std::abs(reference);
}

std::optional<UncertaintyInterval> interval_overlap(const UncertaintyInterval& a,
                                                    const UncertaintyInterval& b) {
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) return std::nullopt;
  return UncertaintyInterval{lo, hi};
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

}  // namespace exobench
