#include "exobench/servo.hpp"

#include "exobench/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <algorithm>
#include <string_view>

namespace exobench {

double decode_position(int raw) {
  if (raw < 0 || raw > kMaxRawPosition) {
    throw DomainError(fmt::format("raw position {} outside 0..{}", raw, kMaxRawPosition));
  }
  return raw * kDegPerCount;
}

LoadReading decode_load(int raw) {
  if (raw < 0 || raw > kMaxRawLoad) {
    throw DomainError(fmt::format("raw load {} outside 0..{}", raw, kMaxRawLoad));
  }
  // 1023 belongs to the CCW half (0-1023 CCW, 1024-2047 CW).
  if (raw < kLoadDirectionBit) return {Direction::CCW, raw * kLoadUnit};
  return {Direction::CW, (raw - kLoadDirectionBit) * kLoadUnit};
}

double load_to_torque(Direction direction, double K) {
  if (!(K >= 0.0)) throw DomainError(fmt::format("load fraction {} must be >= 0", K));
  const double magnitude = kStallTorque * K;
  if (magnitude == 0.0) return 0.0;
  return direction == Direction::CCW ? magnitude : -magnitude;
}

std::vector<DecodedSample> decode_trial(const ServoTrialLog& log) {
  const int neutral = log.metadata.neutral_raw;
  if (neutral < 0 || neutral > kMaxRawPosition) {
    throw DomainError(fmt::format("neutral_raw {} outside 0..{}", neutral, kMaxRawPosition));
  }
  std::vector<DecodedSample> out;
  out.reserve(log.records.size());
  for (size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    DecodedSample s;
    try {
      // Counts grow counter-clockwise (pronation); angles are supination-positive.
      decode_position(r.raw_position);
      s.angle = (neutral - r.raw_position) * kDegPerCount;
      const auto load = decode_load(r.raw_load);
      s.K = load.K;
      s.direction = load.direction;
      s.torque = load_to_torque(load.direction, load.K);
    } catch (const DomainError& e) {
      throw DomainError(fmt::format("record {}: {}", i, e.what()));
    }
    s.t = r.t;
    s.servo_id = r.servo_id;
    s.over_unity = s.K > 1.0;
    out.push_back(s);
  }
  return out;
}

int encode_position(double angle_deg) {
  const auto raw = std::lround(angle_deg / kDegPerCount);
  if (raw < 0 || raw > kMaxRawPosition) {
    throw DomainError(fmt::format("angle {} deg is outside the servo span", angle_deg));
  }
  return static_cast<int>(raw);
}

int encode_load(Direction direction, double K) {
  const auto counts = std::lround(K / kLoadUnit);
  const long limit = direction == Direction::CCW ? kLoadDirectionBit - 1 : kMaxRawLoad - kLoadDirectionBit;
  if (counts < 0 || counts > limit) throw DomainError(fmt::format("load fraction {} is not encodable", K));
  return static_cast<int>(direction == Direction::CCW ? counts : counts + kLoadDirectionBit);
}

int encode_torque(double torque) {
  const double K = std::abs(torque) / kStallTorque;
  return encode_load(torque >= 0.0 ? Direction::CCW : Direction::CW, K);
}

namespace {

void apply_metadata(TrialMetadata& meta, std::string_view key, std::string_view value, size_t line) {
  try {
    if (key == "session_id") {
      meta.session_id = value;
    } else if (key == "trial_label") {
      meta.trial_label = value;
    } else if (key == "joint_name") {
      meta.joint_name = value;
    } else if (key == "speed_rpm") {
      meta.speed_rpm = parse_real(value, "speed_rpm");
    } else if (key == "neutral_raw") {
      meta.neutral_raw = static_cast<int>(parse_integer(value, "neutral_raw"));
    } else {
      meta.extra[std::string(key)] = value;
    }
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("line {}: {}", line, e.what()));
  }
}

}  // namespace

ServoTrialLog parse_trial_log(const std::string& text) {
  ServoTrialLog log;
  bool have_header = false;
  size_t line_no = 0;
  std::string_view rest(text);
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (line.front() == '#') {
      if (have_header) continue;
      const auto body = line.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = body.substr(0, eq);
      auto value = body.substr(eq + 1);
      key.remove_prefix(std::min(key.find_first_not_of(" \t"), key.size()));
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
      value.remove_prefix(std::min(value.find_first_not_of(" \t"), value.size()));
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.remove_suffix(1);
      apply_metadata(log.metadata, key, value, line_no);
      continue;
    }

    const auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells != std::vector<std::string>{"t", "servo_id", "raw_position", "raw_load"}) {
        throw ParseError(fmt::format("line {}: header must be t,servo_id,raw_position,raw_load", line_no));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 4) {
      throw ParseError(fmt::format("line {}: expected 4 fields, found {}", line_no, cells.size()));
    }
    ServoFeedbackRecord r;
    try {
      r.t = parse_real(cells[0], "t");
      r.servo_id = static_cast<int>(parse_integer(cells[1], "servo_id"));
      r.raw_position = static_cast<int>(parse_integer(cells[2], "raw_position"));
      r.raw_load = static_cast<int>(parse_integer(cells[3], "raw_load"));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!log.records.empty() && r.t < log.records.back().t) {
      throw ParseError(fmt::format("line {}: timestamp {} precedes {}", line_no, r.t,
                                   log.records.back().t));
    }
    log.records.push_back(r);
  }
  if (!have_header) throw ParseError("servo log has no header line");
  return log;
}

ServoTrialLog read_trial_log(const std::string& path) { return parse_trial_log(read_text_file(path)); }

std::string format_trial_log(const ServoTrialLog& log) {
  const auto& m = log.metadata;
  std::string out;
  if (!m.session_id.empty()) out += fmt::format("# session_id={}\n", m.session_id);
  if (!m.trial_label.empty()) out += fmt::format("# trial_label={}\n", m.trial_label);
  out += fmt::format("# speed_rpm={}\n", format_real(m.speed_rpm));
  if (!m.joint_name.empty()) out += fmt::format("# joint_name={}\n", m.joint_name);
  out += fmt::format("# neutral_raw={}\n", m.neutral_raw);
  for (const auto& [k, v] : m.extra) out += fmt::format("# {}={}\n", k, v);
  out += "t,servo_id,raw_position,raw_load\n";
  for (const auto& r : log.records) {
    out += fmt::format("{},{},{},{}\n", format_real(r.t), r.servo_id, r.raw_position, r.raw_load);
  }
  return out;
}

}  // namespace exobench
