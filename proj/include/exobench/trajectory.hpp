#pragma once

#include "exobench/ik.hpp"

#include <cstdint>
#include <vector>

namespace exobench {

struct DifferentiateOptions {
  int smoothing_window = 1;  // odd; 1 disables the centred moving average
  bool project = true;       // enforce J qd = 0 and hddot = 0 on dependents
};

// Central differences in the interior, second-order one-sided at the ends.
// Requires >= 3 uniformly spaced states.
IkSolution differentiate(const Multibody& model, const CoordinatePartition& partition,
                         const IkSolution& solution, double sample_rate,
                         const DifferentiateOptions& options = {});

// Velocity and acceleration of a uniformly sampled scalar series.
struct SeriesDerivatives {
  std::vector<double> rate;
  std::vector<double> accel;
};
SeriesDerivatives finite_difference(const std::vector<double>& values, double dt);

std::vector<double> moving_average(const std::vector<double>& values, int window);

// Back-and-forth sweep between two angles: cosine-ramped acceleration into a
// constant-speed phase, cosine-ramped deceleration, then a dwell.
class SweepProfile {
 public:
  SweepProfile(double from, double to, double peak_speed, double ramp_time, double dwell_time);

  double position(double t) const;
  double rate(double t) const;
  double accel(double t) const;

  double stroke_time() const { return 2.0 * ramp_ + cruise_; }
  double period() const { return 2.0 * (stroke_time() + dwell_); }

 private:
  struct Sample {
    double s, v, a;
  };
  Sample stroke(double tau) const;
  Sample evaluate(double t) const;

  double from_, to_, peak_, ramp_, cruise_, dwell_;
};

struct PsSweepSpec {
  double amplitude_pron_deg = 71.05;
  double amplitude_sup_deg = 85.26;
  double speed_rpm = 11.1;
  double duration_s = 6.0;
  double sample_rate_hz = 100.0;
  double noise_sd_m = 0.0;
  double ramp_s = 0.2;
  double dwell_s = 0.25;
  std::uint64_t seed = 42;
  int drive_coord = 19;
};

struct SynthResult {
  MarkerTrajectory markers;
  std::vector<GeneralizedState> truth;  // closed q with projected qd, qdd
  SweepProfile profile;
};

SynthResult synth_ps_trajectory(const Multibody& model, const CoordinatePartition& partition,
                                const PsSweepSpec& spec);

}  // namespace exobench
