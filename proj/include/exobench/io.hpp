#pragma once

#include "exobench/ik.hpp"
#include "exobench/dynamics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace exobench {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::vector<std::string> split_csv_line(std::string_view line);

// Strict whole-field conversions; ParseError names the field.
double parse_real(std::string_view field, std::string_view what);
long parse_integer(std::string_view field, std::string_view what);

// Shortest text that reads back to the same double.
std::string format_real(double v);

// Marker file: `frame,t,<name>_x,<name>_y,<name>_z,...` in metres. An empty
// cell marks the marker missing in that frame. Optional `# sample_rate=<Hz>`
// line; otherwise the rate comes from the mean spacing.
std::string format_marker_csv(const Multibody& model, const MarkerTrajectory& traj);
MarkerTrajectory parse_marker_csv(const std::string& text);

// q file: `frame,t,q1..qN`, rotations in degrees, translations in metres.
struct CoordinateSeries {
  std::vector<double> t;
  std::vector<VecX> q;  // SI (radians)
};
std::string format_q_csv(const Multibody& model, const std::vector<double>& t,
                         const std::vector<VecX>& q);
CoordinateSeries parse_q_csv(const Multibody& model, const std::string& text);

// `t,Q1..QN,lambda1..lambdaM` and `t,P1..PN,Ptotal`, SI units.
std::string format_torque_csv(const JointTorqueSeries& series);
std::string format_power_csv(const PowerSeries& series);

}  // namespace exobench
