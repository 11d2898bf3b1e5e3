#pragma once

#include "exobench/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace exobench {

inline constexpr double kDegPerCount = 0.29;
inline constexpr double kLoadUnit = 0.001;     // fraction of stall torque per count
inline constexpr double kStallTorque = 1.8;    // N m
inline constexpr int kMaxRawPosition = 1023;
inline constexpr int kMaxRawLoad = 2047;
inline constexpr int kLoadDirectionBit = 1024;

enum class Direction { CCW, CW };

struct ServoFeedbackRecord {
  double t = 0.0;
  int servo_id = 0;
  int raw_position = 0;
  int raw_load = 0;

  bool operator==(const ServoFeedbackRecord&) const = default;
};

struct TrialMetadata {
  std::string session_id;
  std::string trial_label;
  double speed_rpm = 0.0;
  std::string joint_name;
  int neutral_raw = 512;
  std::map<std::string, std::string> extra;  // unrecognised keys, kept verbatim

  bool operator==(const TrialMetadata&) const = default;
};

struct ServoTrialLog {
  std::vector<ServoFeedbackRecord> records;
  TrialMetadata metadata;
};

struct LoadReading {
  Direction direction = Direction::CCW;
  double K = 0.0;
};

struct DecodedSample {
  double t = 0.0;
  int servo_id = 0;
  double angle = 0.0;   // deg from neutral
  double torque = 0.0;  // N m, + = CCW = pronation
  double K = 0.0;
  Direction direction = Direction::CCW;
  bool over_unity = false;  // K > 1
};

// raw * 0.29 deg. Throws DomainError outside 0..1023.
double decode_position(int raw);

// 0..1023 -> CCW with K = raw / 1000; 1024..2047 -> CW with K = (raw - 1024) / 1000.
LoadReading decode_load(int raw);

// +1.8 K for CCW, -1.8 K for CW. K above 1 passes through unclamped.
double load_to_torque(Direction direction, double K);

// Element-wise decode with the angle re-referenced to metadata.neutral_raw.
// Out-of-range records raise DomainError naming the record index.
std::vector<DecodedSample> decode_trial(const ServoTrialLog& log);

// Inverse of the decoders, used to synthesise logs. Rounds to the nearest count.
int encode_position(double angle_deg);
int encode_load(Direction direction, double K);
int encode_torque(double torque);

// Header `t,servo_id,raw_position,raw_load`; leading `# key=value` lines are
// metadata. ParseError carries the 1-based line number; timestamps must not
// decrease.
ServoTrialLog parse_trial_log(const std::string& text);
ServoTrialLog read_trial_log(const std::string& path);
std::string format_trial_log(const ServoTrialLog& log);

}  // namespace exobench
