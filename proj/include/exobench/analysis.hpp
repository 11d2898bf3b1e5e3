#pragma once

#include "exobench/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace exobench {

struct RangeStats {
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  std::string units;
};

// Throws DomainError on an empty or non-finite series.
RangeStats range_stats(const std::vector<double>& series, std::string units = {});

struct AggregateStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  int n = 0;
};

// Requires n >= 2.
AggregateStats aggregate(const std::vector<double>& values);

enum class ReliabilityBand { Fair, Moderate, Acceptable, Good, Excellent };

// fair < 0.60 <= moderate < 0.70 <= acceptable < 0.80 <= good < 0.90 <= excellent.
ReliabilityBand reliability_band(double alpha);
std::string_view band_name(ReliabilityBand band);

struct ReliabilityResult {
  double alpha = 0.0;
  ReliabilityBand band = ReliabilityBand::Fair;
  std::pair<std::string, std::string> trial_pair;
};

// Two-item Cronbach's alpha: 2 (1 - (var_a + var_b) / var(a + b)), sample
// variances. Requires equal lengths >= 3 and a non-zero variance of the sums.
ReliabilityResult reliability_alpha(const std::vector<double>& trial_a,
                                    const std::vector<double>& trial_b,
                                    std::pair<std::string, std::string> labels = {"a", "b"});

// 100 |value - reference| / |reference|. Throws DomainError when reference is 0.
double percent_difference(double reference, double value);

struct UncertaintyInterval {
  double lo = 0.0;
  double hi = 0.0;

  static UncertaintyInterval from_mean_sd(double mean, double sd) { return {mean - sd, mean + sd}; }
  bool operator==(const UncertaintyInterval&) const = default;
};

// [max(lo), min(hi)], or nothing when the intervals are disjoint.
std::optional<UncertaintyInterval> interval_overlap(const UncertaintyInterval& a,
                                                    const UncertaintyInterval& b);

// Half-away-from-zero rounding to a number of decimals.
double round_to(double value, int decimals);

}  // namespace exobench
