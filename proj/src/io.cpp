#include "exobench/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace exobench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return out;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(size_t line, const std::string& what) {
  throw ParseError(fmt::format("line {}: {}", line, what));
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path));
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw IoError(fmt::format("error writing '{}'", path));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(std::string_view field, std::string_view what) {
  field = trim(field);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(fmt::format("{}: '{}' is not a finite number", what, field));
  }
  return v;
}

long parse_integer(std::string_view field, std::string_view what) {
  field = trim(field);
  long v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(fmt::format("{}: '{}' is not an integer", what, field));
  }
  return v;
}

std::string format_real(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

std::string format_marker_csv(const Multibody& model, const MarkerTrajectory& traj) {
  std::string out = fmt::format("# sample_rate={}\nframe,t", format_real(traj.sample_rate));
  for (const auto& m : model.markers()) out += fmt::format(",{0}_x,{0}_y,{0}_z", m.name);
  out += '\n';
  for (size_t k = 0; k < traj.frames.size(); ++k) {
    const auto& f = traj.frames[k];
    out += fmt::format("{},{}", k, format_real(f.t));
    for (const auto& m : model.markers()) {
      auto it = f.positions.find(m.name);
      if (it == f.positions.end()) {
        out += ",,,";
      } else {
        for (int i = 0; i < 3; ++i) out += "," + format_real(it->second[i]);
      }
    }
    out += '\n';
  }
  return out;
}

MarkerTrajectory parse_marker_csv(const std::string& text) {
  MarkerTrajectory traj;
  std::vector<std::string> names;
  bool have_header = false;
  double declared_rate = 0.0;
  const auto lines = lines_of(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t no = i + 1;
    const auto line = lines[i];
    if (blank(line)) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.starts_with("sample_rate=")) {
        try {
          declared_rate = parse_real(body.substr(12), "sample_rate");
        } catch (const ParseError& e) {
          fail_at(no, e.what());
        }
      }
      continue;
    }
    const auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "frame" || cells[1] != "t" || (cells.size() - 2) % 3 != 0) {
        fail_at(no, "marker header must be frame,t followed by <name>_x,<name>_y,<name>_z triples");
      }
      for (size_t c = 2; c < cells.size(); c += 3) {
        const std::string& cx = cells[c];
        if (cx.size() < 3 || !cx.ends_with("_x")) fail_at(no, fmt::format("bad marker column '{}'", cx));
        const std::string name = cx.substr(0, cx.size() - 2);
        if (cells[c + 1] != name + "_y" || cells[c + 2] != name + "_z") {
          fail_at(no, fmt::format("columns for marker {} must be _x,_y,_z in order", name));
        }
        names.push_back(name);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 2 + 3 * names.size()) {
      fail_at(no, fmt::format("expected {} fields, found {}", 2 + 3 * names.size(), cells.size()));
    }
    MarkerFrame frame;
    try {
      frame.t = parse_real(cells[1], "t");
      for (size_t m = 0; m < names.size(); ++m) {
        const auto& x = cells[2 + 3 * m];
        const auto& y = cells[3 + 3 * m];
        const auto& z = cells[4 + 3 * m];
        if (x.empty() && y.empty() && z.empty()) continue;
        frame.positions[names[m]] = Vec3(parse_real(x, names[m] + "_x"), parse_real(y, names[m] + "_y"),
                                         parse_real(z, names[m] + "_z"));
      }
    } catch (const ParseError& e) {
      fail_at(no, e.what());
    }
    traj.frames.push_back(std::move(frame));
  }
  if (!have_header) throw ParseError("marker file has no header");
  if (traj.frames.empty()) throw ParseError("marker file has no frames");
  if (declared_rate > 0.0) {
    traj.sample_rate = declared_rate;
  } else if (traj.frames.size() >= 2) {
    const double span = traj.frames.back().t - traj.frames.front().t;
    traj.sample_rate = static_cast<double>(traj.frames.size() - 1) / span;
  } else {
    throw ParseError("single-frame marker file needs a '# sample_rate=' line");
  }
  return traj;
}

std::string format_q_csv(const Multibody& model, const std::vector<double>& t,
                         const std::vector<VecX>& q) {
  if (t.size() != q.size()) throw DomainError("q series: time and coordinate counts differ");
  std::string out = "frame,t";
  for (int c = 1; c <= model.dof(); ++c) out += fmt::format(",q{}", c);
  out += '\n';
  for (size_t k = 0; k < q.size(); ++k) {
    out += fmt::format("{},{}", k, format_real(t[k]));
    for (int s = 0; s < model.dof(); ++s) {
      const double v = model.is_rotation(s) ? q[k][s] / kDeg : q[k][s];
      out += "," + format_real(v);
    }
    out += '\n';
  }
  return out;
}

CoordinateSeries parse_q_csv(const Multibody& model, const std::string& text) {
  CoordinateSeries out;
  bool have_header = false;
  const auto n = static_cast<size_t>(model.dof());
  const auto lines = lines_of(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t no = i + 1;
    const auto line = lines[i];
    if (blank(line) || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (!have_header) {
      bool ok = cells.size() == n + 2 && cells[0] == "frame" && cells[1] == "t";
      for (size_t c = 0; ok && c < n; ++c) ok = cells[c + 2] == fmt::format("q{}", c + 1);
      if (!ok) fail_at(no, fmt::format("q header must be frame,t,q1..q{}", n));
      have_header = true;
      continue;
    }
    if (cells.size() != n + 2) fail_at(no, fmt::format("expected {} fields, found {}", n + 2, cells.size()));
    VecX q(model.dof());
    try {
      out.t.push_back(parse_real(cells[1], "t"));
      for (size_t c = 0; c < n; ++c) {
        const double v = parse_real(cells[c + 2], fmt::format("q{}", c + 1));
        q[static_cast<Eigen::Index>(c)] = model.is_rotation(static_cast<int>(c)) ? v * kDeg : v;
      }
    } catch (const ParseError& e) {
      fail_at(no, e.what());
    }
    out.q.push_back(std::move(q));
  }
  if (!have_header) throw ParseError("q file has no header");
  return out;
}

std::string format_torque_csv(const JointTorqueSeries& series) {
  std::string out = "t";
  const auto n = series.Q.empty() ? 0 : series.Q.front().size();
  const auto m = series.lambda.empty() ? 0 : series.lambda.front().size();
  for (Eigen::Index i = 1; i <= n; ++i) out += fmt::format(",Q{}", i);
  for (Eigen::Index i = 1; i <= m; ++i) out += fmt::format(",lambda{}", i);
  out += '\n';
  for (size_t k = 0; k < series.t.size(); ++k) {
    out += format_real(series.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + format_real(series.Q[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) out += "," + format_real(series.lambda[k][i]);
    out += '\n';
  }
  return out;
}

std::string format_power_csv(const PowerSeries& series) {
  std::string out = "t";
  const auto n = series.per_coord.empty() ? 0 : series.per_coord.front().size();
  for (Eigen::Index i = 1; i <= n; ++i) out += fmt::format(",P{}", i);
  out += ",Ptotal\n";
  for (size_t k = 0; k < series.t.size(); ++k) {
    out += format_real(series.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + format_real(series.per_coord[k][i]);
    out += "," + format_real(series.total[k]) + '\n';
  }
  return out;
}

}  // namespace exobench
