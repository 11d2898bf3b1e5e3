#include "exobench/trajectory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace exobench {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
}  // namespace

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1 || window % 2 == 0) {
    throw DomainError(fmt::format("smoothing window must be a positive odd number, got {}", window));
  }
  if (window == 1) return values;
  const auto n = static_cast<long>(values.size());
  std::vector<double> out(values.size());
  const long half = window / 2;
  for (long k = 0; k < n; ++k) {
    // Shrink symmetrically near the ends so the window stays centred.
    const long h = std::min({half, k, n - 1 - k});
    double sum = 0.0;
    for (long j = k - h; j <= k + h; ++j) sum += values[static_cast<size_t>(j)];
    out[static_cast<size_t>(k)] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

SeriesDerivatives finite_difference(const std::vector<double>& v, double dt) {
  const size_t n = v.size();
  if (n < 3) throw DomainError(fmt::format("differentiation needs >= 3 samples, got {}", n));
  SeriesDerivatives d{std::vector<double>(n), std::vector<double>(n)};
  const double dt2 = dt * dt;
  for (size_t k = 1; k + 1 < n; ++k) {
    d.rate[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
    d.accel[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / dt2;
  }
  d.rate[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
  d.rate[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
  if (n >= 4) {
    d.accel[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / dt2;
    d.accel[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / dt2;
  } else {
    d.accel[0] = d.accel[1];
    d.accel[n - 1] = d.accel[1];
  }
  return d;
}

IkSolution differentiate(const Multibody& model, const CoordinatePartition& partition,
                         const IkSolution& solution, double sample_rate,
                         const DifferentiateOptions& options) {
  const size_t n = solution.states.size();
  if (n < 3) throw DomainError(fmt::format("differentiation needs >= 3 frames, got {}", n));
  if (!(sample_rate > 0.0)) throw DomainError("sample rate must be positive");
  const double dt = 1.0 / sample_rate;
  for (size_t k = 1; k < n; ++k) {
    const double step = solution.states[k].t - solution.states[k - 1].t;
    if (std::abs(step - dt) > 1e-9) {
      throw DomainError(fmt::format("frame {}: spacing {} s is not 1/sample_rate", k, step));
    }
  }

  IkSolution out = solution;
  const int dof = model.dof();
  std::vector<double> series(n);
  for (int c = 0; c < dof; ++c) {
    for (size_t k = 0; k < n; ++k) series[k] = solution.states[k].q[c];
    const auto smoothed = moving_average(series, options.smoothing_window);
    const auto d = finite_difference(smoothed, dt);
    for (size_t k = 0; k < n; ++k) {
      auto& s = out.states[k];
      if (s.qd.size() != dof) s.qd = VecX::Zero(dof);
      if (s.qdd.size() != dof) s.qdd = VecX::Zero(dof);
      s.q[c] = smoothed[k];
      s.qd[c] = d.rate[k];
      s.qdd[c] = d.accel[k];
    }
  }

  if (options.smoothing_window > 1 && !partition.dependent.empty()) {
    for (auto& s : out.states) s.q = solve_closure(model, s.q, partition).q;
  }
  if (options.project && !partition.dependent.empty()) {
    for (auto& s : out.states) {
      s.qd = project_velocity(model, partition, s.q, s.qd);
      s.qdd = project_acceleration(model, partition, s.q, s.qd, s.qdd);
    }
  }
  return out;
}

SweepProfile::SweepProfile(double from, double to, double peak_speed, double ramp_time,
                           double dwell_time)
    : from_(from), to_(to), peak_(peak_speed), ramp_(ramp_time), cruise_(0.0), dwell_(dwell_time) {
  if (!(peak_speed > 0.0)) throw DomainError("sweep speed must be positive");
  if (ramp_time < 0.0 || dwell_time < 0.0) throw DomainError("ramp and dwell must be >= 0");
  const double distance = std::abs(to - from);
  // The two cosine ramps together cover peak * ramp.
  if (distance < peak_ * ramp_) ramp_ = distance / peak_;
  cruise_ = distance / peak_ - ramp_;
}

SweepProfile::Sample SweepProfile::stroke(double tau) const {
  const double vp = peak_;
  if (ramp_ > 0.0 && tau < ramp_) {
    const double w = kPi / ramp_;
    return {0.5 * vp * (tau - std::sin(w * tau) / w), 0.5 * vp * (1.0 - std::cos(w * tau)),
            0.5 * vp * w * std::sin(w * tau)};
  }
  if (tau < ramp_ + cruise_) {
    return {0.5 * vp * ramp_ + vp * (tau - ramp_), vp, 0.0};
  }
  const double u = std::min(tau - ramp_ - cruise_, ramp_);
  if (ramp_ <= 0.0) return {vp * cruise_, 0.0, 0.0};
  const double w = kPi / ramp_;
  return {0.5 * vp * ramp_ + vp * cruise_ + 0.5 * vp * (u + std::sin(w * u) / w),
          0.5 * vp * (1.0 + std::cos(w * u)), -0.5 * vp * w * std::sin(w * u)};
}

SweepProfile::Sample SweepProfile::evaluate(double t) const {
  const double T = stroke_time();
  double tau = std::fmod(std::max(t, 0.0), period());
  const double dir = to_ >= from_ ? 1.0 : -1.0;
  if (tau < T) {
    const auto s = stroke(tau);
    return {from_ + dir * s.s, dir * s.v, dir * s.a};
  }
  tau -= T;
  if (tau < dwell_) return {to_, 0.0, 0.0};
  tau -= dwell_;
  if (tau < T) {
    const auto s = stroke(tau);
    return {to_ - dir * s.s, -dir * s.v, -dir * s.a};
  }
  return {from_, 0.0, 0.0};
}

double SweepProfile::position(double t) const { return evaluate(t).s; }
double SweepProfile::rate(double t) const { return evaluate(t).v; }
double SweepProfile::accel(double t) const { return evaluate(t).a; }

SynthResult synth_ps_trajectory(const Multibody& model, const CoordinatePartition& partition,
                                const PsSweepSpec& spec) {
  if (!(spec.duration_s > 0.0)) throw DomainError("sweep duration must be positive");
  if (!(spec.sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
  if (spec.noise_sd_m < 0.0) throw DomainError("noise sd must be >= 0");
  if (spec.amplitude_pron_deg < 0.0 || spec.amplitude_sup_deg < 0.0) {
    throw DomainError("sweep amplitudes must be >= 0");
  }
  const DofSpec* dof = model.chain().find_dof(spec.drive_coord);
  if (!dof) throw DomainError(fmt::format("no coordinate q{}", spec.drive_coord));
  if (dof->kind != DofKind::Rotation) throw DomainError("the sweep drives a rotational coordinate");
  const int slot = spec.drive_coord - 1;
  if (std::find(partition.independent.begin(), partition.independent.end(), slot) ==
      partition.independent.end()) {
    throw DomainError(fmt::format("q{} is a dependent coordinate", spec.drive_coord));
  }

  const double lo = -spec.amplitude_pron_deg * kDeg;
  const double hi = spec.amplitude_sup_deg * kDeg;
  if (dof->limits && (lo < dof->limits->first - 1e-12 || hi > dof->limits->second + 1e-12)) {
    throw DomainError(fmt::format("sweep [{}, {}] deg exceeds the joint limits of q{}",
                                  -spec.amplitude_pron_deg, spec.amplitude_sup_deg, spec.drive_coord));
  }
  const double peak_speed = spec.speed_rpm * 6.0 * kDeg;  // 1 rpm = 6 deg/s
  SweepProfile profile(lo, hi, peak_speed, spec.ramp_s, spec.dwell_s);

  const auto n_frames = static_cast<size_t>(std::llround(spec.duration_s * spec.sample_rate_hz)) + 1;
  SynthResult out{{}, {}, profile};
  out.markers.sample_rate = spec.sample_rate_hz;
  out.markers.frames.reserve(n_frames);
  out.truth.reserve(n_frames);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sd_m > 0.0 ? spec.noise_sd_m : 1.0);

  VecX q = model.neutral();
  for (size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) / spec.sample_rate_hz;
    q[slot] = profile.position(t);
    try {
      q = solve_closure(model, q, partition).q;
    } catch (const SolverError& e) {
      throw FrameError(k, std::string("synthetic sweep could not be closed: ") + e.what());
    }
    GeneralizedState state;
    state.t = t;
    state.q = q;
    VecX qd = VecX::Zero(model.dof());
    qd[slot] = profile.rate(t);
    VecX qdd = VecX::Zero(model.dof());
    qdd[slot] = profile.accel(t);
    state.qd = project_velocity(model, partition, q, qd);
    state.qdd = project_acceleration(model, partition, q, state.qd, qdd);
    out.truth.push_back(state);

    MarkerFrame frame;
    frame.t = t;
    const auto world = marker_positions(model, q);
    for (size_t m = 0; m < world.size(); ++m) {
      Vec3 p = world[m];
      if (spec.noise_sd_m > 0.0) {
        for (int i = 0; i < 3; ++i) p[i] += noise(rng);
      }
      frame.positions[model.markers()[m].name] = p;
    }
    out.markers.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace exobench
