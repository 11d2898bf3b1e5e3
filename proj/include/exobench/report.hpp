#pragma once

#include "exobench/analysis.hpp"

#include <optional>
#include <string>
#include <vector>

namespace exobench {

// One subject (simulation) or one trial log (experiment): angle in deg,
// torque in N m (pronation positive).
struct SubjectRow {
  std::string label;
  RangeStats angle;
  RangeStats torque;
  std::string ref;
};

// A transcribed or previously computed mean +- SD. sd is absent when the
// source gives only a mean.
struct PublishedValue {
  std::string quantity;
  double mean = 0.0;
  std::optional<double> sd;
  std::string ref;
};

struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;
  int n = 0;  // 0 when transcribed rather than computed
  std::string ref;
};

struct TrialSummary {
  std::string label;
  int day = 0;
  std::optional<MeanSd> torque_min;
  std::optional<MeanSd> torque_max;
  std::optional<MeanSd> torque_range;
  std::string source;  // "published" or "computed"
};

struct AlphaEntry {
  std::string quantity;  // torque_min (supination) or torque_max (pronation)
  std::string trial_a;
  std::string trial_b;
  std::string session;   // intra or inter
  double alpha = 0.0;
  std::string band;
  std::string source;
  std::string ref;
};

// Extremes of one sweep cycle within a trial.
struct Repetition {
  std::string trial;
  int day = 0;
  int rep = 0;
  double angle_min = 0.0;
  double angle_max = 0.0;
  double torque_min = 0.0;
  double torque_max = 0.0;
};

// Contents of a result directory. Every file is optional, but a set must
// contain at least one of summary.csv, published.csv, trials.csv or
// repetitions.csv.
struct ResultSet {
  std::string name;
  std::optional<int> declared_subjects;  // `# subjects=N` in summary.csv
  std::vector<SubjectRow> rows;
  std::vector<PublishedValue> published;
  std::vector<TrialSummary> trials;
  std::vector<AlphaEntry> alpha;
  std::vector<Repetition> repetitions;
  std::vector<std::string> notes;
};

ResultSet load_result_set(const std::string& dir);

// Splits a back-and-forth angle series into complete cycles, cut where the
// angle rises through the middle of its span. A series with fewer than two
// such crossings yields one repetition covering everything.
std::vector<Repetition> segment_repetitions(const std::vector<double>& angle,
                                            const std::vector<double>& torque,
                                            const std::string& trial, int day);

std::string format_summary_csv(const std::vector<SubjectRow>& rows);
std::string format_repetitions_csv(const std::vector<Repetition>& reps);

enum class ReferenceConvention { Simulated, Experimental, Both };
ReferenceConvention parse_reference_convention(const std::string& text);

struct QuantityAggregate {
  std::string quantity;
  std::optional<AggregateStats> computed;
  std::optional<PublishedValue> published;
};

struct SimulationSection {
  std::string name;
  std::vector<SubjectRow> rows;
  bool aggregation_available = false;  // false when n < 2
  std::vector<QuantityAggregate> aggregates;
};

struct ExperimentalSection {
  std::vector<TrialSummary> trials;
  std::vector<AlphaEntry> alpha;
  std::optional<MeanSd> angle_min;
  std::optional<MeanSd> angle_max;
  std::optional<MeanSd> angle_range;
  std::optional<MeanSd> average_torque_range;  // mean of the trial ranges
  std::optional<PublishedValue> published_average_range;
};

// Percent difference on the full-precision inputs and on the inputs rounded
// to two decimals, as printed in summary tables.
struct Comparison {
  std::string label;
  std::string reference_kind;  // simulated or experimental
  double reference = 0.0;
  double value = 0.0;
  double percent = 0.0;
  double reference_rounded = 0.0;
  double value_rounded = 0.0;
  double percent_rounded = 0.0;
};

struct OverlapSection {
  UncertaintyInterval simulated;     // rounded to two decimals
  UncertaintyInterval experimental;  // rounded to two decimals
  std::optional<UncertaintyInterval> overlap;
};

struct SizingSection {
  std::string joint = "PS";
  std::string peak_label;
  double peak_range = 0.0;
  double mean_range = 0.0;
  double peak_to_mean = 0.0;
  double experimental_average = 0.0;
  double peak_gap_percent = 0.0;  // rounded basis, reference = peak
  double mean_gap_percent = 0.0;  // rounded basis, reference = mean
  bool max_based_sizing = false;
};

struct EvaluationReport {
  std::vector<std::string> header;
  ReferenceConvention convention = ReferenceConvention::Both;
  std::optional<SimulationSection> simulation;
  std::optional<ExperimentalSection> experimental;
  std::vector<Comparison> comparisons;
  std::optional<OverlapSection> overlap;
  std::optional<SizingSection> sizing;
  std::vector<std::string> unavailable;
  std::vector<std::string> notes;
};

// Throws DomainError when no result set is given, when a summary declares a
// subject count that its rows do not match, or when experimental sets repeat
// a trial label.
EvaluationReport build_report(const std::optional<ResultSet>& simulated,
                              const std::vector<ResultSet>& experimental,
                              ReferenceConvention convention = ReferenceConvention::Both);

std::string render_report_json(const EvaluationReport& report);
std::string render_report_text(const EvaluationReport& report);

}  // namespace exobench
