#include "exobench/model.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "default_model_text.hpp"

namespace exobench {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr std::string_view kGround = "ground";

Axis parse_axis(const std::string& text) {
  if (text == "X" || text == "x") return Axis::X;
  if (text == "Y" || text == "y") return Axis::Y;
  if (text == "Z" || text == "z") return Axis::Z;
  throw ParseError(fmt::format("unknown axis '{}'", text));
}

DofKind parse_kind(const std::string& text) {
  if (text == "rotation") return DofKind::Rotation;
  if (text == "translation") return DofKind::Translation;
  throw ParseError(fmt::format("unknown dof kind '{}'", text));
}

Vec3 parse_vec3(const json& node, std::string_view what) {
  if (!node.is_array() || node.size() != 3) {
    throw ParseError(fmt::format("{}: expected an array of 3 numbers", what));
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = node.at(i).get<double>();
  return v;
}

Mat3 parse_mat3(const json& node, std::string_view what) {
  if (!node.is_array() || node.size() != 3) {
    throw ParseError(fmt::format("{}: expected a 3x3 array", what));
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = node.at(r);
    if (!row.is_array() || row.size() != 3) {
      throw ParseError(fmt::format("{}: row {} must have 3 entries", what, r));
    }
    for (int c = 0; c < 3; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return out;
}

std::string optional_string(const json& node, const char* key) {
  auto it = node.find(key);
  return it == node.end() ? std::string{} : it->get<std::string>();
}

KinematicChain chain_from_json(const json& doc) {
  KinematicChain chain;
  chain.name = doc.value("name", std::string{});
  chain.n_coords = doc.value("n_coords", 23);
  if (doc.contains("gravity")) chain.gravity = parse_vec3(doc.at("gravity"), "gravity");

  for (const auto& s : doc.at("segments")) {
    SegmentInertia seg;
    seg.name = s.at("name").get<std::string>();
    seg.mass = s.at("mass").get<double>();
    seg.com = parse_vec3(s.at("com"), "segments[].com");
    seg.inertia = parse_mat3(s.at("inertia"), "segments[].inertia");
    seg.provenance = optional_string(s, "provenance");
    chain.segments.push_back(std::move(seg));
  }

  for (const auto& j : doc.at("joints")) {
    JointSpec joint;
    joint.name = j.at("name").get<std::string>();
    joint.parent = j.at("parent").get<std::string>();
    joint.child = j.at("child").get<std::string>();
    joint.anchor = parse_vec3(j.at("anchor"), "joints[].anchor");
    joint.provenance = optional_string(j, "provenance");
    for (const auto& d : j.at("dofs")) {
      DofSpec dof;
      dof.coord = d.at("q").get<int>();
      dof.axis = parse_axis(d.at("axis").get<std::string>());
      dof.kind = parse_kind(d.at("kind").get<std::string>());
      dof.name = d.at("name").get<std::string>();
      dof.actuated = d.value("actuated", false);
      if (d.contains("limits")) {
        const auto& lim = d.at("limits");
        if (!lim.is_array() || lim.size() != 2) {
          throw ParseError(fmt::format("q{}: limits must be [lo, hi]", dof.coord));
        }
        const double scale = dof.kind == DofKind::Rotation ? kDegToRad : 1.0;
        dof.limits = std::pair{lim.at(0).get<double>() * scale, lim.at(1).get<double>() * scale};
      }
      joint.dofs.push_back(std::move(dof));
    }
    chain.joints.push_back(std::move(joint));
  }

  if (doc.contains("loop_cuts")) {
    for (const auto& c : doc.at("loop_cuts")) {
      LoopCut cut;
      cut.name = c.at("name").get<std::string>();
      cut.body_a = c.at("body_a").get<std::string>();
      cut.body_b = c.at("body_b").get<std::string>();
      cut.anchor_a = parse_vec3(c.at("anchor_a"), "loop_cuts[].anchor_a");
      cut.anchor_b = parse_vec3(c.at("anchor_b"), "loop_cuts[].anchor_b");
      cut.n_constraints = c.value("n_constraints", 3);
      cut.dependent_candidates = c.value("dependent_candidates", std::vector<int>{});
      chain.loop_cuts.push_back(std::move(cut));
    }
  }

  if (doc.contains("markers")) {
    for (const auto& m : doc.at("markers")) {
      MarkerAttachment marker;
      marker.name = m.at("name").get<std::string>();
      marker.segment = m.at("segment").get<std::string>();
      marker.local_position = parse_vec3(m.at("position"), "markers[].position");
      chain.markers.push_back(std::move(marker));
    }
  }
  return chain;
}

bool all_finite(const Vec3& v) { return v.allFinite(); }

void check_inertia(const SegmentInertia& seg, ValidationReport& report) {
  const std::string loc = "segments." + seg.name;
  if (!std::isfinite(seg.mass) || seg.mass < 0.0) {
    report.push_back({"negative_mass", loc, fmt::format("mass {} kg must be >= 0", seg.mass)});
  }
  if (!all_finite(seg.com) || !seg.inertia.allFinite()) {
    report.push_back({"non_finite", loc, "com and inertia must be finite"});
    return;
  }
  const double scale = std::max(seg.inertia.cwiseAbs().maxCoeff(), 1e-300);
  if ((seg.inertia - seg.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    report.push_back({"inertia_asymmetric", loc, "inertia tensor is not symmetric"});
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(seg.inertia);
  const Vec3 principal = eig.eigenvalues();
  if (principal.minCoeff() < -1e-12 * scale) {
    report.push_back({"inertia_not_psd", loc,
                      fmt::format("inertia has negative principal moment {}", principal.minCoeff())});
    return;
  }
  const double tol = 1e-12 * scale;
  for (int i = 0; i < 3; ++i) {
    const double a = principal[i];
    const double b = principal[(i + 1) % 3];
    const double c = principal[(i + 2) % 3];
    if (a + b < c - tol) {
      report.push_back({"inertia_triangle", loc,
                        fmt::format("principal moments violate triangle inequality ({} + {} < {})",
                                    a, b, c)});
      return;
    }
  }
}

}  // namespace

Vec3 unit_vector(Axis axis) {
  switch (axis) {
    case Axis::X: return Vec3::UnitX();
    case Axis::Y: return Vec3::UnitY();
    case Axis::Z: return Vec3::UnitZ();
  }
  return Vec3::UnitX();
}

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
  }
  return "?";
}

std::string_view to_string(DofKind kind) {
  return kind == DofKind::Rotation ? "rotation" : "translation";
}

const SegmentInertia* KinematicChain::find_segment(std::string_view segment) const {
  auto it = std::find_if(segments.begin(), segments.end(),
                         [&](const SegmentInertia& s) { return s.name == segment; });
  return it == segments.end() ? nullptr : &*it;
}

const DofSpec* KinematicChain::find_dof(int coord) const {
  for (const auto& joint : joints) {
    for (const auto& dof : joint.dofs) {
      if (dof.coord == coord) return &dof;
    }
  }
  return nullptr;
}

KinematicChain parse_model(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text.begin(), config_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("model document is not valid JSON: {}", e.what()));
  }
  try {
    return chain_from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("model document has an invalid field: {}", e.what()));
  }
}

KinematicChain load_model(std::string_view config_text, const ChainProfile& profile) {
  KinematicChain chain = parse_model(config_text);
  const auto report = validate_chain(chain, profile);
  if (!report.empty()) {
    std::string msg = "model failed validation:";
    for (const auto& v : report) msg += fmt::format("\n  [{}] {}: {}", v.code, v.location, v.message);
    throw ModelError(msg);
  }
  return chain;
}

KinematicChain load_model_file(const std::string& path, const ChainProfile& profile) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open model file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str(), profile);
}

std::string serialize_model(const KinematicChain& chain) {
  json doc;
  doc["format"] = "exobench-model/1";
  doc["name"] = chain.name;
  doc["n_coords"] = chain.n_coords;
  doc["gravity"] = to_json(chain.gravity);

  doc["segments"] = json::array();
  for (const auto& s : chain.segments) {
    json node{{"name", s.name}, {"mass", s.mass}, {"com", to_json(s.com)},
              {"inertia", to_json(s.inertia)}};
    if (!s.provenance.empty()) node["provenance"] = s.provenance;
    doc["segments"].push_back(std::move(node));
  }

  doc["joints"] = json::array();
  for (const auto& j : chain.joints) {
    json node{{"name", j.name}, {"parent", j.parent}, {"child", j.child},
              {"anchor", to_json(j.anchor)}};
    if (!j.provenance.empty()) node["provenance"] = j.provenance;
    node["dofs"] = json::array();
    for (const auto& d : j.dofs) {
      json dof{{"q", d.coord},
               {"axis", std::string(to_string(d.axis))},
               {"kind", std::string(to_string(d.kind))},
               {"name", d.name}};
      if (d.actuated) dof["actuated"] = true;
      if (d.limits) {
        const double scale = d.kind == DofKind::Rotation ? 1.0 / kDegToRad : 1.0;
        dof["limits"] = json::array({d.limits->first * scale, d.limits->second * scale});
      }
      node["dofs"].push_back(std::move(dof));
    }
    doc["joints"].push_back(std::move(node));
  }

  doc["loop_cuts"] = json::array();
  for (const auto& c : chain.loop_cuts) {
    doc["loop_cuts"].push_back({{"name", c.name},
                                {"body_a", c.body_a},
                                {"anchor_a", to_json(c.anchor_a)},
                                {"body_b", c.body_b},
                                {"anchor_b", to_json(c.anchor_b)},
                                {"n_constraints", c.n_constraints},
                                {"dependent_candidates", c.dependent_candidates}});
  }

  doc["markers"] = json::array();
  for (const auto& m : chain.markers) {
    doc["markers"].push_back(
        {{"name", m.name}, {"segment", m.segment}, {"position", to_json(m.local_position)}});
  }
  return doc.dump(2) + "\n";
}

ValidationReport validate_structure(const KinematicChain& chain) {
  ValidationReport report;

  std::set<std::string> segment_names;
  for (const auto& seg : chain.segments) {
    if (!segment_names.insert(seg.name).second) {
      report.push_back({"duplicate_segment", "segments." + seg.name, "segment name defined twice"});
    }
    check_inertia(seg, report);
  }

  auto segment_exists = [&](const std::string& name) { return segment_names.count(name) > 0; };

  std::map<int, std::string> coord_owner;
  std::map<std::string, std::string> parent_of;
  for (const auto& joint : chain.joints) {
    const std::string loc = "joints." + joint.name;
    if (joint.parent != kGround && !segment_exists(joint.parent)) {
      report.push_back({"missing_segment", loc, fmt::format("unknown parent segment '{}'", joint.parent)});
    }
    if (!segment_exists(joint.child)) {
      report.push_back({"missing_segment", loc, fmt::format("unknown child segment '{}'", joint.child)});
    }
    if (!all_finite(joint.anchor)) report.push_back({"non_finite", loc, "anchor must be finite"});
    if (joint.dofs.empty()) report.push_back({"empty_joint", loc, "joint has no degrees of freedom"});

    auto [it, fresh] = parent_of.emplace(joint.child, joint.parent);
    if (!fresh && it->second != joint.parent) {
      report.push_back({"not_a_tree", loc,
                        fmt::format("segment '{}' already has parent '{}'", joint.child, it->second)});
    }

    for (const auto& dof : joint.dofs) {
      const std::string dloc = fmt::format("{}.q{}", loc, dof.coord);
      if (dof.coord < 1 || dof.coord > chain.n_coords) {
        report.push_back({"coord_out_of_range", dloc,
                          fmt::format("coordinate index {} outside 1..{}", dof.coord, chain.n_coords)});
      }
      auto [owner, inserted] = coord_owner.emplace(dof.coord, joint.name);
      if (!inserted) {
        report.push_back({"duplicate_coord", dloc,
                          fmt::format("q{} already used by joint {}", dof.coord, owner->second)});
      }
      if (dof.limits && dof.limits->first > dof.limits->second) {
        report.push_back({"bad_limits", dloc, "lower limit exceeds upper limit"});
      }
    }
  }

  for (int c = 1; c <= chain.n_coords; ++c) {
    if (!coord_owner.count(c)) {
      report.push_back({"missing_coord", fmt::format("q{}", c), "coordinate not assigned to any joint"});
    }
  }

  // Every segment must reach ground through its parents without cycles.
  for (const auto& seg : chain.segments) {
    std::string cur = seg.name;
    std::set<std::string> seen;
    bool ok = false;
    while (true) {
      if (cur == kGround) {
        ok = true;
        break;
      }
      if (!seen.insert(cur).second) break;
      auto it = parent_of.find(cur);
      if (it == parent_of.end()) break;
      cur = it->second;
    }
    if (!ok) {
      report.push_back({"not_a_tree", "segments." + seg.name, "segment is not connected to ground"});
    }
  }

  for (const auto& cut : chain.loop_cuts) {
    const std::string loc = "loop_cuts." + cut.name;
    if (!segment_exists(cut.body_a)) {
      report.push_back({"missing_segment", loc, fmt::format("unknown body '{}'", cut.body_a)});
    }
    if (!segment_exists(cut.body_b)) {
      report.push_back({"missing_segment", loc, fmt::format("unknown body '{}'", cut.body_b)});
    }
    if (cut.n_constraints != 3) {
      report.push_back({"cut_constraints", loc, "a cut ball joint carries exactly 3 constraints"});
    }
    if (static_cast<int>(cut.dependent_candidates.size()) < cut.n_constraints) {
      report.push_back({"cut_candidates", loc, "fewer dependent candidates than constraints"});
    }
    for (int c : cut.dependent_candidates) {
      if (!coord_owner.count(c)) {
        report.push_back({"cut_candidates", loc, fmt::format("candidate q{} is not a coordinate", c)});
      }
    }
  }

  std::set<std::string> marker_names;
  for (const auto& m : chain.markers) {
    const std::string loc = "markers." + m.name;
    if (!marker_names.insert(m.name).second) {
      report.push_back({"duplicate_marker", loc, "marker name defined twice"});
    }
    if (!segment_exists(m.segment)) {
      report.push_back({"missing_segment", loc, fmt::format("unknown segment '{}'", m.segment)});
    }
    if (!all_finite(m.local_position)) report.push_back({"non_finite", loc, "position must be finite"});
  }

  if (!all_finite(chain.gravity)) report.push_back({"non_finite", "gravity", "gravity must be finite"});
  return report;
}

ValidationReport validate_chain(const KinematicChain& chain, const ChainProfile& profile) {
  ValidationReport report;
  if (chain.n_coords != profile.coords) {
    report.push_back({"n_coords_mismatch", "n_coords",
                      fmt::format("n_coords mismatch: {} declared, {} expected", chain.n_coords,
                                  profile.coords)});
  }
  int dof_total = 0;
  for (const auto& j : chain.joints) dof_total += static_cast<int>(j.dofs.size());
  if (dof_total != profile.coords) {
    report.push_back({"n_coords_mismatch", "joints",
                      fmt::format("n_coords mismatch: joints carry {} coordinates, {} expected",
                                  dof_total, profile.coords)});
  }
  if (static_cast<int>(chain.segments.size()) != profile.segments) {
    report.push_back({"segment_count", "segments",
                      fmt::format("{} segments, {} expected", chain.segments.size(), profile.segments)});
  }
  if (static_cast<int>(chain.loop_cuts.size()) != profile.loop_cuts) {
    report.push_back({"loop_cut_count", "loop_cuts",
                      fmt::format("{} loop cuts, {} expected", chain.loop_cuts.size(), profile.loop_cuts)});
  }
  const int joint_total = static_cast<int>(chain.joints.size() + chain.loop_cuts.size());
  if (joint_total != profile.joints) {
    report.push_back({"joint_count", "joints",
                      fmt::format("{} joints including cuts, {} expected", joint_total, profile.joints)});
  }
  auto structural = validate_structure(chain);
  report.insert(report.end(), structural.begin(), structural.end());
  return report;
}

int coordinate_index(const KinematicChain& chain, std::string_view name) {
  const auto dot = name.find('.');
  if (dot == std::string_view::npos) {
    throw DomainError(fmt::format("unknown coordinate '{}' (expected JOINT.dof)", name));
  }
  const auto joint_name = name.substr(0, dot);
  const auto dof_name = name.substr(dot + 1);
  for (const auto& joint : chain.joints) {
    if (joint.name != joint_name) continue;
    for (const auto& dof : joint.dofs) {
      if (dof.name == dof_name) return dof.coord;
    }
  }
  throw DomainError(fmt::format("unknown coordinate '{}'", name));
}

std::string coordinate_name(const KinematicChain& chain, int coord) {
  for (const auto& joint : chain.joints) {
    for (const auto& dof : joint.dofs) {
      if (dof.coord == coord) return joint.name + "." + dof.name;
    }
  }
  throw DomainError(fmt::format("no coordinate q{}", coord));
}

std::string_view default_model_text() { return detail::kDefaultModelJson; }

KinematicChain default_model() { return load_model(default_model_text()); }

}  // namespace exobench
