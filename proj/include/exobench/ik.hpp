#pragma once

#include "exobench/kinematics.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace exobench {

// Measured marker positions at one instant. Absent keys are missing markers.
struct MarkerFrame {
  double t = 0.0;
  std::map<std::string, Vec3> positions;
};

struct MarkerTrajectory {
  std::vector<MarkerFrame> frames;
  double sample_rate = 100.0;  // Hz

  // Throws DomainError unless t is strictly increasing with uniform spacing.
  void validate(double spacing_tolerance = 1e-9) const;
};

// Raised for a failure tied to a trajectory frame.
struct FrameError : SolverError {
  FrameError(size_t frame_index, const std::string& what);
  size_t frame;
};

struct IkOptions {
  double initial_damping = 1e-3;
  double step_tolerance = 1e-8;
  double relative_tolerance = 1e-10;
  int max_iterations = 200;
  // Weight (m^2/rad^2) of a proximal term w |q_ind - q_init,ind|^2 that pins
  // directions the markers cannot observe, such as the GH Y-X-Y gimbal.
  double proximal_weight = 1e-10;
  ClosureOptions closure;
  bool record_history = false;
};

struct IkFrameResult {
  VecX q;
  double residual = 0.0;         // f(q), m^2
  double constraint_norm = 0.0;  // ||h||_inf, m
  int iterations = 0;
  int markers_used = 0;
  std::vector<double> history;  // f at every accepted iterate, when recorded
};

// Damped least squares over the independent coordinates; dependents are
// re-closed inside every residual evaluation.
IkFrameResult inverse_kinematics_frame(const Multibody& model,
                                       const CoordinatePartition& partition,
                                       const MarkerFrame& frame, const VecX& q_init,
                                       const IkOptions& options = {});

enum class FailurePolicy { Abort, SkipAndInterpolate };

struct IkTrajectoryOptions {
  IkOptions frame;
  FailurePolicy policy = FailurePolicy::Abort;
  bool warm_start = true;
};

struct IkSolution {
  std::vector<GeneralizedState> states;
  std::vector<double> residual;
  std::vector<double> constraint_norm;
  std::vector<int> iterations;
  std::vector<size_t> interpolated_frames;
  size_t missing_markers = 0;  // total marker samples absent across frames
};

IkSolution inverse_kinematics_trajectory(const Multibody& model,
                                         const CoordinatePartition& partition,
                                         const MarkerTrajectory& trajectory,
                                         const IkTrajectoryOptions& options = {});

}  // namespace exobench
