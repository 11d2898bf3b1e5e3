#include "exobench/report.hpp"

#include "exobench/io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

namespace exobench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CsvTable {
  std::string path;
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<size_t> line;
};

CsvTable read_csv_table(const std::string& path, const std::vector<std::string>& required) {
  CsvTable table;
  table.path = path;
  const std::string text = read_text_file(path);
  size_t no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = split_csv_line(line.substr(1, eq - 1)).front();
        table.meta[key] = split_csv_line(line.substr(eq + 1)).front();
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (table.columns.empty()) {
      table.columns = cells;
      for (const auto& r : required) {
        if (std::find(cells.begin(), cells.end(), r) == cells.end()) {
          throw ParseError(fmt::format("{}: line {}: missing column '{}'", path, no, r));
        }
      }
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw ParseError(fmt::format("{}: line {}: expected {} fields, found {}", path, no,
                                   table.columns.size(), cells.size()));
    }
    std::map<std::string, std::string> row;
    for (size_t c = 0; c < cells.size(); ++c) row[table.columns[c]] = cells[c];
    table.rows.push_back(std::move(row));
    table.line.push_back(no);
  }
  if (table.columns.empty()) throw ParseError(fmt::format("{}: no header line", path));
  return table;
}

double cell_real(const CsvTable& t, size_t i, const std::string& col) {
  try {
    return parse_real(t.rows[i].at(col), col);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: line {}: {}", t.path, t.line[i], e.what()));
  }
}

std::optional<double> cell_optional_real(const CsvTable& t, size_t i, const std::string& col) {
  auto it = t.rows[i].find(col);
  if (it == t.rows[i].end() || it->second.empty()) return std::nullopt;
  return cell_real(t, i, col);
}

int cell_int(const CsvTable& t, size_t i, const std::string& col) {
  try {
    return static_cast<int>(parse_integer(t.rows[i].at(col), col));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: line {}: {}", t.path, t.line[i], e.what()));
  }
}

std::string cell_text(const CsvTable& t, size_t i, const std::string& col) {
  auto it = t.rows[i].find(col);
  return it == t.rows[i].end() ? std::string{} : it->second;
}

RangeStats range_from(double lo, double hi, double range, const char* units) {
  return {lo, hi, range, units};
}

const std::vector<std::string> kQuantities = {"angle_min",  "angle_max",  "angle_range",
                                              "torque_min", "torque_max", "torque_range"};

double row_value(const SubjectRow& r, const std::string& q) {
  if (q == "angle_min") return r.angle.min;
  if (q == "angle_max") return r.angle.max;
  if (q == "angle_range") return r.angle.range;
  if (q == "torque_min") return r.torque.min;
  if (q == "torque_max") return r.torque.max;
  return r.torque.range;
}

const PublishedValue* find_published(const std::vector<PublishedValue>& values, const std::string& q) {
  for (const auto& v : values) {
    if (v.quantity == q) return &v;
  }
  return nullptr;
}

MeanSd mean_sd_of(const std::vector<double>& values, std::string ref) {
  MeanSd out;
  out.n = static_cast<int>(values.size());
  out.ref = std::move(ref);
  if (values.size() >= 2) {
    const auto a = aggregate(values);
    out.mean = a.mean;
    out.sd = a.sd;
  } else {
    out.mean = values.front();
  }
  return out;
}

MeanSd from_published(const PublishedValue& p) { return {p.mean, p.sd, 0, p.ref}; }

}  // namespace

ResultSet load_result_set(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError(fmt::format("result directory '{}' does not exist", dir));
  ResultSet set;
  set.name = fs::path(dir).lexically_normal().filename().string();
  if (set.name.empty()) set.name = fs::path(dir).lexically_normal().parent_path().filename().string();
  bool any = false;

  const auto path = [&](const char* file) { return (fs::path(dir) / file).string(); };

  if (fs::exists(path("summary.csv"))) {
    any = true;
    const auto t = read_csv_table(path("summary.csv"),
                                  {"label", "angle_min", "angle_max", "angle_range", "torque_min",
                                   "torque_max", "torque_range"});
    if (auto it = t.meta.find("subjects"); it != t.meta.end()) {
      set.declared_subjects = static_cast<int>(parse_integer(it->second, "subjects"));
    }
    for (size_t i = 0; i < t.rows.size(); ++i) {
      SubjectRow r;
      r.label = cell_text(t, i, "label");
      r.angle = range_from(cell_real(t, i, "angle_min"), cell_real(t, i, "angle_max"),
                           cell_real(t, i, "angle_range"), "deg");
      r.torque = range_from(cell_real(t, i, "torque_min"), cell_real(t, i, "torque_max"),
                            cell_real(t, i, "torque_range"), "N m");
      r.ref = cell_text(t, i, "ref");
      set.rows.push_back(std::move(r));
    }
  }
  if (fs::exists(path("published.csv"))) {
    any = true;
    const auto t = read_csv_table(path("published.csv"), {"quantity", "mean"});
    for (size_t i = 0; i < t.rows.size(); ++i) {
      set.published.push_back({cell_text(t, i, "quantity"), cell_real(t, i, "mean"),
                               cell_optional_real(t, i, "sd"), cell_text(t, i, "ref")});
    }
  }
  if (fs::exists(path("trials.csv"))) {
    any = true;
    const auto t = read_csv_table(path("trials.csv"), {"trial", "day", "quantity", "mean", "sd"});
    for (size_t i = 0; i < t.rows.size(); ++i) {
      const std::string label = cell_text(t, i, "trial");
      auto it = std::find_if(set.trials.begin(), set.trials.end(),
                             [&](const TrialSummary& s) { return s.label == label; });
      if (it == set.trials.end()) {
        set.trials.push_back({label, cell_int(t, i, "day"), {}, {}, {}, "published"});
        it = set.trials.end() - 1;
      }
      const MeanSd v{cell_real(t, i, "mean"), cell_optional_real(t, i, "sd"), 0, cell_text(t, i, "ref")};
      const std::string q = cell_text(t, i, "quantity");
      if (q == "torque_min") {
        it->torque_min = v;
      } else if (q == "torque_max") {
        it->torque_max = v;
      } else if (q == "torque_range") {
        it->torque_range = v;
      } else {
        throw ParseError(fmt::format("{}: line {}: unknown quantity '{}'", t.path, t.line[i], q));
      }
    }
  }
  if (fs::exists(path("alpha.csv"))) {
    const auto t = read_csv_table(path("alpha.csv"), {"quantity", "trial_a", "trial_b", "alpha"});
    for (size_t i = 0; i < t.rows.size(); ++i) {
      const double a = cell_real(t, i, "alpha");
      set.alpha.push_back({cell_text(t, i, "quantity"), cell_text(t, i, "trial_a"),
                           cell_text(t, i, "trial_b"), cell_text(t, i, "session"), a,
                           std::string(band_name(reliability_band(a))), "published",
                           cell_text(t, i, "ref")});
    }
  }
  if (fs::exists(path("repetitions.csv"))) {
    any = true;
    const auto t = read_csv_table(path("repetitions.csv"),
                                  {"trial", "day", "rep", "angle_min", "angle_max", "torque_min",
                                   "torque_max"});
    for (size_t i = 0; i < t.rows.size(); ++i) {
      set.repetitions.push_back({cell_text(t, i, "trial"), cell_int(t, i, "day"), cell_int(t, i, "rep"),
                                 cell_real(t, i, "angle_min"), cell_real(t, i, "angle_max"),
                                 cell_real(t, i, "torque_min"), cell_real(t, i, "torque_max")});
    }
  }
  if (fs::exists(path("notes.txt"))) {
    const std::string text = read_text_file(path("notes.txt"));
    size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? text.size() : nl + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) set.notes.push_back(line);
    }
  }
  if (!any) {
    throw IoError(fmt::format("'{}' holds no summary.csv, published.csv, trials.csv or repetitions.csv",
                              dir));
  }
  return set;
}

std::vector<Repetition> segment_repetitions(const std::vector<double>& angle,
                                            const std::vector<double>& torque,
                                            const std::string& trial, int day) {
  if (angle.size() != torque.size()) throw DomainError("repetitions: angle and torque lengths differ");
  if (angle.empty()) throw DomainError("repetitions: empty series");
  const auto span = range_stats(angle);
  const double mid = 0.5 * (span.min + span.max);
  std::vector<size_t> cuts;
  for (size_t k = 1; k < angle.size(); ++k) {
    if (angle[k - 1] < mid && angle[k] >= mid) cuts.push_back(k);
  }
  if (cuts.size() < 2) cuts = {0, angle.size()};

  std::vector<Repetition> out;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    const std::vector<double> a(angle.begin() + static_cast<long>(cuts[c]),
                                angle.begin() + static_cast<long>(cuts[c + 1]));
    const std::vector<double> q(torque.begin() + static_cast<long>(cuts[c]),
                                torque.begin() + static_cast<long>(cuts[c + 1]));
    const auto ra = range_stats(a);
    const auto rq = range_stats(q);
    out.push_back({trial, day, static_cast<int>(c + 1), ra.min, ra.max, rq.min, rq.max});
  }
  return out;
}

std::string format_summary_csv(const std::vector<SubjectRow>& rows) {
  std::string out = fmt::format("# subjects={}\n", rows.size());
  out += "label,angle_min,angle_max,angle_range,torque_min,torque_max,torque_range,ref\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.label, format_real(r.angle.min),
                       format_real(r.angle.max), format_real(r.angle.range), format_real(r.torque.min),
                       format_real(r.torque.max), format_real(r.torque.range), r.ref);
  }
  return out;
}

std::string format_repetitions_csv(const std::vector<Repetition>& reps) {
  std::string out = "trial,day,rep,angle_min,angle_max,torque_min,torque_max\n";
  for (const auto& r : reps) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.trial, r.day, r.rep, format_real(r.angle_min),
                       format_real(r.angle_max), format_real(r.torque_min), format_real(r.torque_max));
  }
  return out;
}

ReferenceConvention parse_reference_convention(const std::string& text) {
  if (text == "simulated") return ReferenceConvention::Simulated;
  if (text == "experimental") return ReferenceConvention::Experimental;
  if (text == "both") return ReferenceConvention::Both;
  throw DomainError(fmt::format("reference must be simulated, experimental or both, got '{}'", text));
}

namespace {

SimulationSection build_simulation(const ResultSet& set, std::vector<std::string>& notes) {
  if (set.declared_subjects && *set.declared_subjects != static_cast<int>(set.rows.size())) {
    throw DomainError(fmt::format("inconsistent subject counts in '{}': {} declared, {} rows", set.name,
                                  *set.declared_subjects, set.rows.size()));
  }
  SimulationSection sim;
  sim.name = set.name;
  sim.rows = set.rows;
  sim.aggregation_available = set.rows.size() >= 2;
  for (const auto& q : kQuantities) {
    QuantityAggregate agg{q, std::nullopt, std::nullopt};
    if (sim.aggregation_available) {
      std::vector<double> values;
      for (const auto& r : set.rows) values.push_back(row_value(r, q));
      agg.computed = aggregate(values);
    }
    if (const auto* p = find_published(set.published, q)) agg.published = *p;
    if (agg.computed && agg.published) {
      const double dm = std::abs(agg.computed->mean - agg.published->mean);
      if (dm > 0.01) {
        notes.push_back(fmt::format("{} {}: computed mean {:.4f} differs from the published {} by {:.4f}",
                                    set.name, q, agg.computed->mean, agg.published->mean, dm));
      }
      if (agg.published->sd) {
        const double ds = std::abs(agg.computed->sd - *agg.published->sd);
        if (ds > 0.01) {
          notes.push_back(fmt::format("{} {}: computed SD {:.4f} differs from the published {} by {:.4f}",
                                      set.name, q, agg.computed->sd, *agg.published->sd, ds));
        }
      }
    }
    sim.aggregates.push_back(std::move(agg));
  }
  return sim;
}

ExperimentalSection build_experimental(const std::vector<ResultSet>& sets, std::vector<std::string>& notes) {
  ExperimentalSection exp;
  std::map<std::string, std::vector<Repetition>> reps_by_trial;
  std::vector<std::string> trial_order;
  std::vector<PublishedValue> published;
  std::set<std::string> labels;

  for (const auto& set : sets) {
    for (const auto& t : set.trials) {
      if (!labels.insert(t.label).second) {
        throw DomainError(fmt::format("trial '{}' appears in more than one experimental set", t.label));
      }
      exp.trials.push_back(t);
    }
    for (const auto& a : set.alpha) exp.alpha.push_back(a);
    for (const auto& r : set.repetitions) {
      if (!reps_by_trial.count(r.trial)) {
        if (!labels.insert(r.trial).second) {
          throw DomainError(fmt::format("trial '{}' appears in more than one experimental set", r.trial));
        }
        trial_order.push_back(r.trial);
      }
      reps_by_trial[r.trial].push_back(r);
    }
    for (const auto& p : set.published) published.push_back(p);
  }

  std::vector<double> all_min, all_max, all_range;
  for (const auto& label : trial_order) {
    const auto& reps = reps_by_trial[label];
    std::vector<double> tmin, tmax, trange;
    for (const auto& r : reps) {
      tmin.push_back(r.torque_min);
      tmax.push_back(r.torque_max);
      trange.push_back(r.torque_max - r.torque_min);
      all_min.push_back(r.angle_min);
      all_max.push_back(r.angle_max);
      all_range.push_back(r.angle_max - r.angle_min);
    }
    TrialSummary s{label, reps.front().day, mean_sd_of(tmin, "computed"), mean_sd_of(tmax, "computed"),
                   mean_sd_of(trange, "computed"), "computed"};
    exp.trials.push_back(std::move(s));
  }

  for (size_t i = 0; i < trial_order.size(); ++i) {
    for (size_t j = i + 1; j < trial_order.size(); ++j) {
      const auto& a = reps_by_trial[trial_order[i]];
      const auto& b = reps_by_trial[trial_order[j]];
      const std::string session = a.front().day == b.front().day ? "intra" : "inter";
      if (a.size() != b.size()) {
        notes.push_back(fmt::format("alpha {} & {} unavailable: {} vs {} repetitions", trial_order[i],
                                    trial_order[j], a.size(), b.size()));
        continue;
      }
      for (const char* q : {"torque_min", "torque_max"}) {
        std::vector<double> xa, xb;
        for (size_t k = 0; k < a.size(); ++k) {
          xa.push_back(std::string(q) == "torque_min" ? a[k].torque_min : a[k].torque_max);
          xb.push_back(std::string(q) == "torque_min" ? b[k].torque_min : b[k].torque_max);
        }
        try {
          const auto r = reliability_alpha(xa, xb, {trial_order[i], trial_order[j]});
          exp.alpha.push_back({q, trial_order[i], trial_order[j], session, r.alpha,
                               std::string(band_name(r.band)), "computed", "computed"});
        } catch (const DomainError& e) {
          notes.push_back(fmt::format("alpha {} {} & {} unavailable: {}", q, trial_order[i],
                                      trial_order[j], e.what()));
        }
      }
    }
  }

  if (!all_range.empty()) {
    exp.angle_min = mean_sd_of(all_min, "computed");
    exp.angle_max = mean_sd_of(all_max, "computed");
    exp.angle_range = mean_sd_of(all_range, "computed");
  } else {
    if (const auto* p = find_published(published, "angle_min")) exp.angle_min = from_published(*p);
    if (const auto* p = find_published(published, "angle_max")) exp.angle_max = from_published(*p);
    if (const auto* p = find_published(published, "angle_range")) exp.angle_range = from_published(*p);
  }

  std::vector<double> trial_ranges;
  for (const auto& t : exp.trials) {
    if (t.torque_range) trial_ranges.push_back(t.torque_range->mean);
  }
  if (!trial_ranges.empty()) exp.average_torque_range = mean_sd_of(trial_ranges, "mean of trial ranges");
  if (const auto* p = find_published(published, "average_range")) exp.published_average_range = *p;
  return exp;
}

void add_comparison(EvaluationReport& report, const std::string& label, double sim, double exp) {
  const auto add = [&](const char* kind, double ref, double val) {
    Comparison c;
    c.label = label;
    c.reference_kind = kind;
    c.reference = ref;
    c.value = val;
    c.percent = percent_difference(ref, val);
    c.reference_rounded = round_to(ref, 2);
    c.value_rounded = round_to(val, 2);
    c.percent_rounded = percent_difference(c.reference_rounded, c.value_rounded);
    report.comparisons.push_back(c);
  };
  if (report.convention != ReferenceConvention::Experimental) add("simulated", sim, exp);
  if (report.convention != ReferenceConvention::Simulated) add("experimental", exp, sim);
}

}  // namespace

EvaluationReport build_report(const std::optional<ResultSet>& simulated,
                              const std::vector<ResultSet>& experimental,
                              ReferenceConvention convention) {
  if (!simulated && experimental.empty()) throw DomainError("report needs at least one result set");
  EvaluationReport report;
  report.convention = convention;
  report.header = {
      "Statistics: mean +- sample SD (n - 1).",
      "Reliability alpha: two-item Cronbach's alpha, an interpretation of the unnamed coefficient; bands "
      "fair < 0.60, moderate < 0.70, acceptable < 0.80, good < 0.90, excellent otherwise.",
      "Percent difference: 100 |value - reference| / |reference|, given on full-precision inputs and on "
      "inputs rounded to two decimals.",
      "Torque sign: positive = pronation (CCW).",
  };

  if (simulated) report.simulation = build_simulation(*simulated, report.notes);
  if (!experimental.empty()) report.experimental = build_experimental(experimental, report.notes);

  if (simulated) {
    for (const auto& n : simulated->notes) report.notes.push_back(simulated->name + ": " + n);
  }
  for (const auto& set : experimental) {
    for (const auto& n : set.notes) report.notes.push_back(set.name + ": " + n);
  }

  if (report.simulation && !report.simulation->aggregation_available) {
    report.unavailable.push_back("simulation aggregates: n < 2");
  }
  if (!report.simulation || !report.experimental) {
    report.unavailable.push_back("percent differences: needs simulated and experimental sets");
    report.unavailable.push_back("interval overlap: needs simulated and experimental sets");
    report.unavailable.push_back("actuator sizing: needs simulated and experimental sets");
    return report;
  }

  const auto& sim = *report.simulation;
  const auto& exp = *report.experimental;
  if (sim.rows.empty()) {
    report.unavailable.push_back("comparisons: the simulated set has no subject rows");
    return report;
  }

  const auto sim_mean = [&](const std::string& q) {
    for (const auto& a : sim.aggregates) {
      if (a.quantity == q && a.computed) return a.computed->mean;
    }
    return row_value(sim.rows.front(), q);
  };
  const auto peak = std::max_element(sim.rows.begin(), sim.rows.end(), [](const auto& a, const auto& b) {
    return a.torque.range < b.torque.range;
  });

  if (exp.average_torque_range) {
    const double avg = exp.average_torque_range->mean;
    add_comparison(report, "torque range: simulated mean vs experimental average", sim_mean("torque_range"), avg);
    add_comparison(report, fmt::format("torque range: simulated peak ({}) vs experimental average", peak->label),
                   peak->torque.range, avg);
  } else {
    report.unavailable.push_back("torque comparisons: no experimental torque ranges");
  }
  if (exp.angle_range) {
    add_comparison(report, "angle range: simulated mean vs experimental mean", sim_mean("angle_range"),
                   exp.angle_range->mean);
  } else {
    report.unavailable.push_back("angle range comparison: no experimental angle range");
  }
  for (const auto& t : exp.trials) {
    if (!t.torque_range) continue;
    add_comparison(report, fmt::format("torque range: simulated mean vs {}", t.label),
                   sim_mean("torque_range"), t.torque_range->mean);
  }

  const QuantityAggregate* sim_range = nullptr;
  for (const auto& a : sim.aggregates) {
    if (a.quantity == "angle_range") sim_range = &a;
  }
  std::optional<std::pair<double, double>> sim_interval;
  if (sim_range && sim_range->computed) {
    sim_interval = {sim_range->computed->mean, sim_range->computed->sd};
  } else if (sim_range && sim_range->published && sim_range->published->sd) {
    sim_interval = {sim_range->published->mean, *sim_range->published->sd};
  }
  if (sim_interval && exp.angle_range && exp.angle_range->sd) {
    OverlapSection o;
    const auto r2 = [](double v) { return round_to(v, 2); };
    o.simulated = UncertaintyInterval::from_mean_sd(r2(sim_interval->first), r2(sim_interval->second));
    o.simulated = {r2(o.simulated.lo), r2(o.simulated.hi)};
    o.experimental = UncertaintyInterval::from_mean_sd(r2(exp.angle_range->mean), r2(*exp.angle_range->sd));
    o.experimental = {r2(o.experimental.lo), r2(o.experimental.hi)};
    o.overlap = interval_overlap(o.simulated, o.experimental);
    report.overlap = o;
  } else {
    report.unavailable.push_back("interval overlap: a standard deviation is missing");
  }

  if (exp.average_torque_range) {
    SizingSection s;
    s.peak_label = peak->label;
    s.peak_range = peak->torque.range;
    s.mean_range = sim_mean("torque_range");
    s.peak_to_mean = s.peak_range / s.mean_range;
    s.experimental_average = exp.average_torque_range->mean;
    s.peak_gap_percent = percent_difference(round_to(s.peak_range, 2), round_to(s.experimental_average, 2));
    s.mean_gap_percent = percent_difference(round_to(s.mean_range, 2), round_to(s.experimental_average, 2));
    s.max_based_sizing = s.peak_gap_percent < s.mean_gap_percent;
    report.sizing = s;
  }
  return report;
}

namespace {

ordered_json to_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json to_json(const MeanSd& v) {
  return {{"mean", v.mean}, {"sd", to_json(v.sd)}, {"n", v.n}, {"ref", v.ref}};
}

ordered_json to_json(const std::optional<MeanSd>& v) { return v ? to_json(*v) : ordered_json(nullptr); }

ordered_json to_json(const RangeStats& r) {
  return {{"min", r.min}, {"max", r.max}, {"range", r.range}, {"units", r.units}};
}

ordered_json to_json(const UncertaintyInterval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

std::string_view convention_name(ReferenceConvention c) {
  switch (c) {
    case ReferenceConvention::Simulated: return "simulated";
    case ReferenceConvention::Experimental: return "experimental";
    case ReferenceConvention::Both: return "both";
  }
  return "both";
}

}  // namespace

std::string render_report_json(const EvaluationReport& report) {
  ordered_json doc;
  doc["format"] = "exobench-report/1";
  doc["header"] = report.header;
  doc["reference_convention"] = convention_name(report.convention);

  if (report.simulation) {
    const auto& s = *report.simulation;
    ordered_json sim;
    sim["name"] = s.name;
    sim["rows"] = ordered_json::array();
    for (const auto& r : s.rows) {
      sim["rows"].push_back(
          {{"label", r.label}, {"angle", to_json(r.angle)}, {"torque", to_json(r.torque)}, {"ref", r.ref}});
    }
    sim["aggregation_available"] = s.aggregation_available;
    sim["aggregates"] = ordered_json::array();
    for (const auto& a : s.aggregates) {
      ordered_json node{{"quantity", a.quantity}};
      node["computed"] = a.computed ? ordered_json{{"mean", a.computed->mean}, {"sd", a.computed->sd},
                                                   {"n", a.computed->n}}
                                    : ordered_json(nullptr);
      node["published"] = a.published ? ordered_json{{"mean", a.published->mean},
                                                     {"sd", to_json(a.published->sd)},
                                                     {"ref", a.published->ref}}
                                      : ordered_json(nullptr);
      sim["aggregates"].push_back(node);
    }
    doc["simulation"] = sim;
  } else {
    doc["simulation"] = nullptr;
  }

  if (report.experimental) {
    const auto& e = *report.experimental;
    ordered_json exp;
    exp["trials"] = ordered_json::array();
    for (const auto& t : e.trials) {
      exp["trials"].push_back({{"label", t.label},
                               {"day", t.day},
                               {"source", t.source},
                               {"torque_min", to_json(t.torque_min)},
                               {"torque_max", to_json(t.torque_max)},
                               {"torque_range", to_json(t.torque_range)}});
    }
    exp["alpha"] = ordered_json::array();
    for (const auto& a : e.alpha) {
      exp["alpha"].push_back({{"quantity", a.quantity},
                              {"trial_a", a.trial_a},
                              {"trial_b", a.trial_b},
                              {"session", a.session},
                              {"alpha", a.alpha},
                              {"band", a.band},
                              {"source", a.source},
                              {"ref", a.ref}});
    }
    exp["angle_min"] = to_json(e.angle_min);
    exp["angle_max"] = to_json(e.angle_max);
    exp["angle_range"] = to_json(e.angle_range);
    exp["average_torque_range"] = to_json(e.average_torque_range);
    exp["published_average_range"] =
        e.published_average_range
            ? ordered_json{{"mean", e.published_average_range->mean},
                           {"sd", to_json(e.published_average_range->sd)},
                           {"ref", e.published_average_range->ref}}
            : ordered_json(nullptr);
    doc["experimental"] = exp;
  } else {
    doc["experimental"] = nullptr;
  }

  doc["percent_differences"] = ordered_json::array();
  for (const auto& c : report.comparisons) {
    doc["percent_differences"].push_back({{"label", c.label},
                                          {"reference_kind", c.reference_kind},
                                          {"reference", c.reference},
                                          {"value", c.value},
                                          {"percent", c.percent},
                                          {"reference_rounded", c.reference_rounded},
                                          {"value_rounded", c.value_rounded},
                                          {"percent_rounded", c.percent_rounded}});
  }
  if (report.overlap) {
    const auto& o = *report.overlap;
    doc["interval_overlap"] = {{"simulated", to_json(o.simulated)},
                               {"experimental", to_json(o.experimental)},
                               {"overlap", o.overlap ? to_json(*o.overlap) : ordered_json(nullptr)}};
  } else {
    doc["interval_overlap"] = nullptr;
  }
  if (report.sizing) {
    const auto& s = *report.sizing;
    doc["sizing"] = {{"joint", s.joint},
                     {"peak_label", s.peak_label},
                     {"peak_range", s.peak_range},
                     {"mean_range", s.mean_range},
                     {"peak_to_mean", s.peak_to_mean},
                     {"experimental_average", s.experimental_average},
                     {"peak_gap_percent", s.peak_gap_percent},
                     {"mean_gap_percent", s.mean_gap_percent},
                     {"max_based_sizing", s.max_based_sizing}};
  } else {
    doc["sizing"] = nullptr;
  }
  doc["unavailable"] = report.unavailable;
  doc["notes"] = report.notes;
  return doc.dump(2) + "\n";
}

namespace {

std::string f2(double v) {
  const double r = round_to(v, 2);
  return fmt::format("{:.2f}", r == 0.0 ? 0.0 : r);
}

std::string pm(const std::optional<MeanSd>& v) {
  if (!v) return "-";
  return v->sd ? fmt::format("{} +- {}", f2(v->mean), f2(*v->sd)) : f2(v->mean);
}

}  // namespace

std::string render_report_text(const EvaluationReport& report) {
  std::string out;
  for (const auto& h : report.header) out += "# " + h + "\n";
  out += fmt::format("# Reference convention: {}\n", convention_name(report.convention));

  if (report.simulation) {
    const auto& s = *report.simulation;
    out += fmt::format("\nSimulation: {}\n", s.name);
    out += fmt::format("{:<14}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}\n", "subject", "ang_min", "ang_max",
                       "ang_rng", "tq_min", "tq_max", "tq_rng");
    for (const auto& r : s.rows) {
      out += fmt::format("{:<14}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}\n", r.label, f2(r.angle.min),
                         f2(r.angle.max), f2(r.angle.range), f2(r.torque.min), f2(r.torque.max),
                         f2(r.torque.range));
    }
    if (s.aggregation_available) {
      out += "\nAggregates (computed mean +- SD | published)\n";
      for (const auto& a : s.aggregates) {
        std::string pub = "-";
        if (a.published) {
          pub = a.published->sd ? fmt::format("{} +- {}", f2(a.published->mean), f2(*a.published->sd))
                                : f2(a.published->mean);
        }
        out += fmt::format("  {:<14}{:>20} | {}\n", a.quantity,
                           fmt::format("{} +- {}", f2(a.computed->mean), f2(a.computed->sd)), pub);
      }
    } else {
      out += "Aggregates: unavailable (n < 2)\n";
    }
  }

  if (report.experimental) {
    const auto& e = *report.experimental;
    out += "\nExperimental trials (torque, N m)\n";
    out += fmt::format("{:<10}{:>5}{:>18}{:>18}{:>18}  {}\n", "trial", "day", "min", "max", "range", "source");
    for (const auto& t : e.trials) {
      out += fmt::format("{:<10}{:>5}{:>18}{:>18}{:>18}  {}\n", t.label, t.day, pm(t.torque_min),
                         pm(t.torque_max), pm(t.torque_range), t.source);
    }
    out += fmt::format("Average range: {}", pm(e.average_torque_range));
    if (e.published_average_range) out += fmt::format(" (published {})", f2(e.published_average_range->mean));
    out += "\n";
    out += fmt::format("Angle range: {}  min: {}  max: {}\n", pm(e.angle_range), pm(e.angle_min),
                       pm(e.angle_max));
    if (!e.alpha.empty()) {
      out += "\nReliability (alpha)\n";
      for (const auto& a : e.alpha) {
        out += fmt::format("  {:<11}{:<8} & {:<8}{:<6}{:>6}  {:<11}{}\n", a.quantity, a.trial_a, a.trial_b,
                           a.session, f2(a.alpha), a.band, a.source);
      }
    }
  }

  if (!report.comparisons.empty()) {
    out += "\nPercent differences (rounded inputs | full precision)\n";
    for (const auto& c : report.comparisons) {
      out += fmt::format("  {} [ref {}]: {} vs {} -> {}% | {}%\n", c.label, c.reference_kind,
                         f2(c.reference_rounded), f2(c.value_rounded), f2(c.percent_rounded), f2(c.percent));
    }
  }
  if (report.overlap) {
    const auto& o = *report.overlap;
    out += fmt::format("\nInterval overlap: simulated [{}, {}], experimental [{}, {}] -> ", f2(o.simulated.lo),
                       f2(o.simulated.hi), f2(o.experimental.lo), f2(o.experimental.hi));
    out += o.overlap ? fmt::format("[{}, {}]\n", f2(o.overlap->lo), f2(o.overlap->hi)) : "none\n";
  }
  if (report.sizing) {
    const auto& s = *report.sizing;
    out += fmt::format(
        "\nSizing ({}): peak range {} ({}), mean range {}, peak/mean {}, experimental average {}\n"
        "  gap peak vs experimental {}%, mean vs experimental {}%{}\n",
        s.joint, f2(s.peak_range), s.peak_label, f2(s.mean_range), f2(s.peak_to_mean),
        f2(s.experimental_average), f2(s.peak_gap_percent), f2(s.mean_gap_percent),
        s.max_based_sizing ? "; size actuators on the peak torque range" : "");
  }
  if (!report.unavailable.empty()) {
    out += "\nUnavailable\n";
    for (const auto& u : report.unavailable) out += "  " + u + "\n";
  }
  if (!report.notes.empty()) {
    out += "\nNotes\n";
    for (const auto& n : report.notes) out += "  " + n + "\n";
  }
  return out;
}

}  // namespace exobench
