#include "cli.hpp"

#include "exobench/analysis.hpp"
#include "exobench/dynamics.hpp"
#include "exobench/io.hpp"
#include "exobench/report.hpp"
#include "exobench/servo.hpp"
#include "exobench/trajectory.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <ostream>

#ifndef EXOBENCH_VERSION
#define EXOBENCH_VERSION "0.0.0"
#endif

namespace exobench::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr const char* kPsCoordinate = "RU.pronation_supination";
constexpr int kPsServoId = 2;

struct Common {
  std::string model_path;
  std::string out_dir = "runs";
  std::string run_name;
};

void add_common(CLI::App* cmd, Common& c, bool with_model = true) {
  if (with_model) cmd->add_option("--model", c.model_path, "Model file (default: the embedded model)");
  cmd->add_option("--out", c.out_dir, "Parent directory for run directories")->capture_default_str();
  cmd->add_option("--run-name", c.run_name, "Run directory name (default: <command>-<UTC timestamp>)");
}

KinematicChain load_chain(const Common& c) {
  return c.model_path.empty() ? default_model() : load_model_file(c.model_path);
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Collects what a command read and wrote so the run directory documents itself.
class Run {
 public:
  Run(const Common& c, std::string command) : command_(std::move(command)) {
    std::string name = c.run_name;
    if (name.empty()) {
      const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
      name = fmt::format("{}-{:%Y%m%dT%H%M%SZ}", command_, now);
      std::string candidate = name;
      for (int k = 2; fs::exists(fs::path(c.out_dir) / candidate); ++k) candidate = fmt::format("{}-{}", name, k);
      name = candidate;
    }
    dir_ = fs::path(c.out_dir) / name;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create run directory '{}': {}", dir_.string(), ec.message()));
    manifest_["tool"] = "exobench";
    manifest_["version"] = EXOBENCH_VERSION;
    manifest_["command"] = command_;
    manifest_["inputs"] = ordered_json::array();
    manifest_["options"] = ordered_json::object();
    manifest_["outputs"] = ordered_json::array();
  }

  std::string read_input(const std::string& path) {
    std::string text = read_text_file(path);
    manifest_["inputs"].push_back(
        {{"path", path}, {"bytes", text.size()}, {"fnv1a64", fmt::format("{:016x}", fnv1a(text))}});
    return text;
  }

  void note_input_dir(const std::string& path) { manifest_["inputs"].push_back({{"path", path}}); }

  template <typename T>
  void option(const std::string& key, const T& value) {
    manifest_["options"][key] = value;
  }

  void write(const std::string& file, const std::string& text) {
    write_text_file((dir_ / file).string(), text);
    manifest_["outputs"].push_back(file);
  }

  void finish() { write_text_file((dir_ / "manifest.json").string(), manifest_.dump(2) + "\n"); }

  std::string dir() const { return dir_.string(); }

 private:
  std::string command_;
  fs::path dir_;
  ordered_json manifest_;
};

void add_model_input(Run& run, const Common& c) {
  if (c.model_path.empty()) {
    run.option("model", "embedded");
  } else {
    run.read_input(c.model_path);
  }
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Common& c, std::ostream& out) {
  KinematicChain chain;
  std::string label = "embedded model";
  if (c.model_path.empty()) {
    chain = parse_model(default_model_text());
  } else {
    chain = parse_model(read_text_file(c.model_path));
    label = c.model_path;
  }
  const auto report = validate_chain(chain);
  if (report.empty()) {
    int coords = 0;
    for (const auto& j : chain.joints) coords += static_cast<int>(j.dofs.size());
    out << fmt::format("{}: valid ({} segments, {} coordinates, {} loop cut(s), {} markers)\n", label,
                       chain.segments.size(), coords, chain.loop_cuts.size(), chain.markers.size());
    return kOk;
  }
  out << fmt::format("{}: {} violation(s)\n", label, report.size());
  for (const auto& v : report) out << fmt::format("[{}] {}: {}\n", v.code, v.location, v.message);
  return kDomainFailure;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  PsSweepSpec spec;
  uint64_t seed = 42;
  bool servo_log = false;
  std::string trial_label = "trial1";
  int day = 0;
  int neutral_raw = 512;
};

ServoTrialLog encode_servo_log(const Multibody& model, const CoordinatePartition& partition,
                               const SynthResult& syn, const SynthArgs& a) {
  const int slot = coordinate_index(model.chain(), kPsCoordinate) - 1;
  ServoTrialLog log;
  log.metadata.session_id = "synthetic";
  log.metadata.trial_label = a.trial_label;
  log.metadata.speed_rpm = a.spec.speed_rpm;
  log.metadata.joint_name = "PS";
  log.metadata.neutral_raw = a.neutral_raw;
  log.metadata.extra["day"] = std::to_string(a.day);
  const auto torques = inverse_dynamics_series(model, partition, syn.truth);
  for (size_t k = 0; k < syn.truth.size(); ++k) {
    const double angle = syn.truth[k].q[slot] * kRadToDeg;
    ServoFeedbackRecord r;
    r.t = syn.truth[k].t;
    r.servo_id = kPsServoId;
    r.raw_position = a.neutral_raw - static_cast<int>(std::lround(angle / kDegPerCount));
    decode_position(r.raw_position);
    r.raw_load = encode_torque(-torques.Q[k][slot]);
    log.records.push_back(r);
  }
  return log;
}

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out) {
  Run run(c, "synth");
  add_model_input(run, c);
  const Multibody model(load_chain(c));
  const auto partition = choose_partition(model);
  PsSweepSpec spec = a.spec;
  spec.seed = a.seed;
  spec.drive_coord = coordinate_index(model.chain(), kPsCoordinate);
  run.option("seed", a.seed);
  run.option("amplitude_pron_deg", spec.amplitude_pron_deg);
  run.option("amplitude_sup_deg", spec.amplitude_sup_deg);
  run.option("speed_rpm", spec.speed_rpm);
  run.option("duration_s", spec.duration_s);
  run.option("sample_rate_hz", spec.sample_rate_hz);
  run.option("noise_sd_m", spec.noise_sd_m);

  const auto syn = synth_ps_trajectory(model, partition, spec);
  std::vector<double> t;
  std::vector<VecX> q;
  std::vector<double> ps;
  const int slot = spec.drive_coord - 1;
  for (const auto& s : syn.truth) {
    t.push_back(s.t);
    q.push_back(s.q);
    ps.push_back(s.q[slot] * kRadToDeg);
  }
  run.write("markers.csv", format_marker_csv(model, syn.markers));
  run.write("truth_q.csv", format_q_csv(model, t, q));
  if (a.servo_log) {
    run.option("neutral_raw", a.neutral_raw);
    run.write("servo_log.csv", format_trial_log(encode_servo_log(model, partition, syn, a)));
  }
  run.finish();
  const auto rom = range_stats(ps, "deg");
  out << fmt::format("synth: {} frames at {} Hz, seed {}\n", syn.markers.frames.size(), spec.sample_rate_hz,
                     a.seed);
  out << fmt::format("ground-truth PS angle: min {:.2f} max {:.2f} ROM {:.2f} deg\n", rom.min, rom.max, rom.range);
  out << fmt::format("output: {}\n", run.dir());
  return kOk;
}

// ---------------------------------------------------------------- ik

struct IkArgs {
  std::string markers;
  std::string truth;
  std::string policy = "abort";
};

int cmd_ik(const Common& c, const IkArgs& a, std::ostream& out) {
  const Multibody model(load_chain(c));
  const auto partition = choose_partition(model);
  Run run(c, "ik");
  add_model_input(run, c);
  const auto traj = parse_marker_csv(run.read_input(a.markers));
  IkTrajectoryOptions opts;
  if (a.policy == "abort") {
    opts.policy = FailurePolicy::Abort;
  } else if (a.policy == "interpolate") {
    opts.policy = FailurePolicy::SkipAndInterpolate;
  } else {
    throw DomainError(fmt::format("--policy must be abort or interpolate, got '{}'", a.policy));
  }
  run.option("policy", a.policy);

  const auto sol = inverse_kinematics_trajectory(model, partition, traj, opts);
  std::vector<double> t;
  std::vector<VecX> q;
  std::string residuals = "frame,t,residual,constraint_norm,iterations,interpolated\n";
  for (size_t k = 0; k < sol.states.size(); ++k) {
    t.push_back(sol.states[k].t);
    q.push_back(sol.states[k].q);
    const bool interp = std::find(sol.interpolated_frames.begin(), sol.interpolated_frames.end(), k) !=
                        sol.interpolated_frames.end();
    residuals += fmt::format("{},{},{},{},{},{}\n", k, format_real(sol.states[k].t), format_real(sol.residual[k]),
                             format_real(sol.constraint_norm[k]), sol.iterations[k], interp ? 1 : 0);
  }
  run.write("q.csv", format_q_csv(model, t, q));
  run.write("ik_residuals.csv", residuals);

  double max_res = 0.0;
  double max_h = 0.0;
  for (size_t k = 0; k < sol.states.size(); ++k) {
    if (std::isfinite(sol.residual[k])) max_res = std::max(max_res, sol.residual[k]);
    max_h = std::max(max_h, sol.constraint_norm[k]);
  }
  out << fmt::format("ik: {} frames, max residual {:.3e} m^2, max |h| {:.3e} m\n", sol.states.size(), max_res,
                     max_h);
  out << fmt::format("missing marker samples: {} (excluded from the fit)\n", sol.missing_markers);
  out << fmt::format("interpolated frames: {}\n", sol.interpolated_frames.size());

  if (!a.truth.empty()) {
    const auto truth = parse_q_csv(model, run.read_input(a.truth));
    if (truth.q.size() != sol.states.size()) {
      throw DomainError(fmt::format("truth has {} frames, IK produced {}", truth.q.size(), sol.states.size()));
    }
    const int slot = coordinate_index(model.chain(), kPsCoordinate) - 1;
    double ps_err = 0.0;
    double ind_err = 0.0;
    for (size_t k = 0; k < truth.q.size(); ++k) {
      ps_err = std::max(ps_err, std::abs(sol.states[k].q[slot] - truth.q[k][slot]));
      for (int s : partition.independent) ind_err = std::max(ind_err, std::abs(sol.states[k].q[s] - truth.q[k][s]));
    }
    out << fmt::format("vs truth: max PS error {:.3e} rad, max independent error {:.3e}\n", ps_err, ind_err);
  }
  run.finish();
  out << fmt::format("output: {}\n", run.dir());
  return kOk;
}

// ---------------------------------------------------------------- id

struct IdArgs {
  std::string q_file;
  int smoothing_window = 1;
  std::string label = "simulation";
};

int cmd_id(const Common& c, const IdArgs& a, std::ostream& out) {
  const Multibody model(load_chain(c));
  const auto partition = choose_partition(model);
  Run run(c, "id");
  add_model_input(run, c);
  run.option("smoothing_window", a.smoothing_window);
  const auto series = parse_q_csv(model, run.read_input(a.q_file));
  const size_t n = series.q.size();
  if (n < 3) throw DomainError(fmt::format("differentiation needs >= 3 frames, got {}", n));
  const double rate = static_cast<double>(n - 1) / (series.t.back() - series.t.front());

  IkSolution sol;
  for (size_t k = 0; k < n; ++k) {
    GeneralizedState s;
    s.t = series.t[k];
    s.q = series.q[k];
    sol.states.push_back(s);
  }
  DifferentiateOptions dopts;
  dopts.smoothing_window = a.smoothing_window;
  const auto diff = differentiate(model, partition, sol, rate, dopts);
  const auto torques = inverse_dynamics_series(model, partition, diff.states);
  std::vector<VecX> qd;
  for (const auto& s : diff.states) qd.push_back(s.qd);
  const auto power = joint_power(torques, qd);
  const double E = energy(power);
  const double W = net_work(power);

  const int slot = coordinate_index(model.chain(), kPsCoordinate) - 1;
  std::vector<double> angle;
  std::vector<double> ps_torque;
  std::string plot = "t,ps_angle_deg,ps_torque,ps_power,total_power\n";
  for (size_t k = 0; k < n; ++k) {
    angle.push_back(diff.states[k].q[slot] * kRadToDeg);
    ps_torque.push_back(-torques.Q[k][slot]);
    plot += fmt::format("{},{},{},{},{}\n", format_real(torques.t[k]), format_real(angle.back()),
                        format_real(ps_torque.back()), format_real(power.per_coord[k][slot]),
                        format_real(power.total[k]));
  }
  const auto ra = range_stats(angle, "deg");
  const auto rq = range_stats(ps_torque, "N m");

  run.write("torque.csv", format_torque_csv(torques));
  run.write("power.csv", format_power_csv(power));
  run.write("series.csv", plot);
  ordered_json energy_doc{{"energy_abs_J", E}, {"net_work_J", W}, {"sample_rate_hz", rate}, {"frames", n}};
  run.write("energy.json", energy_doc.dump(2) + "\n");
  run.write("summary.csv", format_summary_csv({{a.label, ra, rq, "computed"}}));
  run.finish();

  out << fmt::format("id: {} frames at {:.6g} Hz\n", n, rate);
  out << fmt::format("PS angle: min {:.2f} max {:.2f} range {:.2f} deg\n", ra.min, ra.max, ra.range);
  out << fmt::format("PS torque (pronation +): min {:.4f} max {:.4f} range {:.4f} N m\n", rq.min, rq.max,
                     rq.range);
  out << fmt::format("energy (|P|) {:.6f} J, net work {:.6f} J\n", E, W);
  out << fmt::format("output: {}\n", run.dir());
  return kOk;
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
  std::vector<std::string> logs;
  int servo_id = -1;
};

int cmd_decode(const Common& c, const DecodeArgs& a, std::ostream& out) {
  Run run(c, "decode");
  if (a.servo_id >= 0) run.option("servo_id", a.servo_id);
  std::vector<SubjectRow> rows;
  std::vector<Repetition> reps;
  for (const auto& path : a.logs) {
    ServoTrialLog log;
    try {
      log = parse_trial_log(run.read_input(path));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
    if (a.servo_id >= 0) {
      std::erase_if(log.records, [&](const ServoFeedbackRecord& r) { return r.servo_id != a.servo_id; });
    }
    const auto samples = decode_trial(log);
    if (samples.empty()) throw DomainError(fmt::format("{}: no records to decode", path));
    std::string label = log.metadata.trial_label;
    if (label.empty()) label = fs::path(path).stem().string();
    int day = 0;
    if (auto it = log.metadata.extra.find("day"); it != log.metadata.extra.end()) {
      day = static_cast<int>(parse_integer(it->second, "day"));
    }

    std::string csv = "t,servo_id,angle_deg,torque,K,direction,over_unity\n";
    std::vector<double> angle;
    std::vector<double> torque;
    int over = 0;
    for (const auto& s : samples) {
      csv += fmt::format("{},{},{},{},{},{},{}\n", format_real(s.t), s.servo_id, format_real(s.angle),
                         format_real(s.torque), format_real(s.K), s.direction == Direction::CCW ? "CCW" : "CW",
                         s.over_unity ? 1 : 0);
      angle.push_back(s.angle);
      torque.push_back(s.torque);
      over += s.over_unity ? 1 : 0;
    }
    run.write(fmt::format("decoded_{}.csv", label), csv);
    const auto ra = range_stats(angle, "deg");
    const auto rq = range_stats(torque, "N m");
    rows.push_back({label, ra, rq, path});
    const auto r = segment_repetitions(angle, torque, label, day);
    reps.insert(reps.end(), r.begin(), r.end());
    out << fmt::format("{}: {} samples, ROM {:.2f} deg [{:.2f}, {:.2f}], torque range {:.4f} N m [{:.4f}, {:.4f}], "
                       "{} cycle(s)\n",
                       label, samples.size(), ra.range, ra.min, ra.max, rq.range, rq.min, rq.max, r.size());
    if (over > 0) out << fmt::format("{}: {} sample(s) with load fraction above 1 (kept, flagged)\n", label, over);
  }
  run.write("summary.csv", format_summary_csv(rows));
  run.write("repetitions.csv", format_repetitions_csv(reps));
  run.finish();
  out << fmt::format("output: {}\n", run.dir());
  return kOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string sim;
  std::vector<std::string> exp;
  std::string reference = "both";
};

int cmd_report(const Common& c, const ReportArgs& a, std::ostream& out) {
  const auto convention = parse_reference_convention(a.reference);
  std::optional<ResultSet> sim;
  if (!a.sim.empty()) sim = load_result_set(a.sim);
  std::vector<ResultSet> exp;
  for (const auto& d : a.exp) exp.push_back(load_result_set(d));
  const auto report = build_report(sim, exp, convention);

  Run run(c, "report");
  run.option("reference", a.reference);
  if (!a.sim.empty()) run.note_input_dir(a.sim);
  for (const auto& d : a.exp) run.note_input_dir(d);
  const std::string text = render_report_text(report);
  run.write("report.json", render_report_json(report));
  run.write("report.txt", text);
  run.finish();
  out << text;
  out << fmt::format("output: {}\n", run.dir());
  return kOk;
}

void configure_logging() {
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("EXOBENCH_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Exoskeleton test-bench evaluation toolkit", "exobench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EXOBENCH_VERSION);

  Common common;
  auto* validate = app.add_subcommand("validate", "Validate a model file");
  validate->add_option("--model", common.model_path, "Model file (default: the embedded model)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Synthesise a pronation-supination sweep");
  add_common(synth, common);
  synth->add_option("--seed", synth_args.seed, "Noise seed")->capture_default_str();
  synth->add_option("--noise-sd", synth_args.spec.noise_sd_m, "Marker noise SD (m)")->capture_default_str();
  synth->add_option("--amplitude-pron", synth_args.spec.amplitude_pron_deg, "Pronation amplitude (deg)")
      ->capture_default_str();
  synth->add_option("--amplitude-sup", synth_args.spec.amplitude_sup_deg, "Supination amplitude (deg)")
      ->capture_default_str();
  synth->add_option("--speed-rpm", synth_args.spec.speed_rpm, "Peak speed (rpm)")->capture_default_str();
  synth->add_option("--duration", synth_args.spec.duration_s, "Duration (s)")->capture_default_str();
  synth->add_option("--sample-rate", synth_args.spec.sample_rate_hz, "Sample rate (Hz)")->capture_default_str();
  synth->add_flag("--servo-log", synth_args.servo_log, "Also emit an encoded servo feedback log");
  synth->add_option("--trial-label", synth_args.trial_label, "Trial label for the servo log")->capture_default_str();
  synth->add_option("--day", synth_args.day, "Session day for the servo log")->capture_default_str();
  synth->add_option("--neutral-raw", synth_args.neutral_raw, "Servo count at the neutral position")
      ->capture_default_str();

  IkArgs ik_args;
  auto* ik = app.add_subcommand("ik", "Inverse kinematics on a marker file");
  add_common(ik, common);
  ik->add_option("--markers", ik_args.markers, "Marker CSV")->required();
  ik->add_option("--truth", ik_args.truth, "Ground-truth q CSV to compare against");
  ik->add_option("--policy", ik_args.policy, "Frame failure policy: abort or interpolate")->capture_default_str();

  IdArgs id_args;
  auto* id = app.add_subcommand("id", "Inverse dynamics on a q trajectory");
  add_common(id, common);
  id->add_option("--q", id_args.q_file, "q CSV")->required();
  id->add_option("--smoothing-window", id_args.smoothing_window, "Odd moving-average window (1 = off)")
      ->capture_default_str();
  id->add_option("--label", id_args.label, "Row label in summary.csv")->capture_default_str();

  DecodeArgs decode_args;
  auto* decode = app.add_subcommand("decode", "Decode servo feedback logs");
  add_common(decode, common, false);
  decode->add_option("--log", decode_args.logs, "Servo log file(s)")->required();
  decode->add_option("--servo-id", decode_args.servo_id, "Keep only this servo id");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Assemble the evaluation report");
  add_common(report, common, false);
  report->add_option("--sim", report_args.sim, "Simulation result directory");
  report->add_option("--exp", report_args.exp, "Experimental result directories");
  report->add_option("--reference", report_args.reference, "simulated, experimental or both")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << EXOBENCH_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }

  try {
    if (*validate) return cmd_validate(common, out);
    if (*synth) return cmd_synth(common, synth_args, out);
    if (*ik) return cmd_ik(common, ik_args, out);
    if (*id) return cmd_id(common, id_args, out);
    if (*decode) return cmd_decode(common, decode_args, out);
    if (*report) {
      if (report_args.sim.empty() && report_args.exp.empty()) {
        throw DomainError("report needs --sim and/or --exp");
      }
      return cmd_report(common, report_args, out);
    }
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const FrameError& e) {
    err << "error at frame " << e.frame << ": " << e.what() << "\n";
    return kDomainFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kDomainFailure;
}

}  // namespace exobench::cli
