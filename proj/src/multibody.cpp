#include "exobench/multibody.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace exobench {

Multibody::Multibody(KinematicChain chain) : chain_(std::move(chain)) {
  const auto report = validate_structure(chain_);
  if (!report.empty()) {
    std::string msg = "chain is not a solvable tree:";
    for (const auto& v : report) msg += fmt::format("\n  [{}] {}: {}", v.code, v.location, v.message);
    throw ModelError(msg);
  }

  const int n_seg = n_segments();
  segment_primitive_.assign(n_seg, -1);
  slot_primitive_.assign(dof(), -1);

  // Joints grouped by child, preserving listed order.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const JointSpec*>> groups;
  for (const auto& joint : chain_.joints) {
    if (!groups.count(joint.child)) group_order.push_back(joint.child);
    groups[joint.child].push_back(&joint);
  }

  std::vector<bool> placed(n_seg, false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& child : group_order) {
      const int child_idx = segment_index(child);
      if (placed[child_idx]) continue;
      const auto& group = groups[child];
      const std::string& parent = group.front()->parent;
      int current = -1;
      if (parent != "ground") {
        const int parent_idx = segment_index(parent);
        if (!placed[parent_idx]) continue;
        current = segment_primitive_[parent_idx];
      }
      for (const JointSpec* joint : group) {
        for (size_t i = 0; i < joint->dofs.size(); ++i) {
          const auto& dof = joint->dofs[i];
          Primitive prim;
          prim.parent = current;
          prim.offset = i == 0 ? joint->anchor : Vec3::Zero();
          prim.axis = unit_vector(dof.axis);
          prim.kind = dof.kind;
          prim.slot = dof.coord - 1;
          current = static_cast<int>(primitives_.size());
          slot_primitive_[prim.slot] = current;
          primitives_.push_back(prim);
        }
      }
      primitives_[current].segment = child_idx;
      segment_primitive_[child_idx] = current;
      placed[child_idx] = true;
      progress = true;
    }
  }

  for (int s = 0; s < n_seg; ++s) {
    if (segment_primitive_[s] < 0) {
      throw ModelError(fmt::format("segment '{}' has no joint connecting it to ground",
                                   chain_.segments[s].name));
    }
  }

  const size_t n = primitives_.size();
  ancestry_.assign(n * n, 0);
  for (size_t k = 0; k < n; ++k) {
    for (int a = static_cast<int>(k); a >= 0; a = primitives_[a].parent) ancestry_[k * n + a] = 1;
  }

  for (const auto& m : chain_.markers) {
    markers_.push_back({m.name, segment_index(m.segment), m.local_position});
  }
  for (const auto& c : chain_.loop_cuts) {
    Cut cut{c.name, segment_index(c.body_a), segment_index(c.body_b), c.anchor_a, c.anchor_b, {}};
    for (int coord : c.dependent_candidates) cut.dependent_candidates.push_back(coord - 1);
    cuts_.push_back(std::move(cut));
  }
}

int Multibody::segment_index(std::string_view name) const {
  for (size_t i = 0; i < chain_.segments.size(); ++i) {
    if (chain_.segments[i].name == name) return static_cast<int>(i);
  }
  throw DomainError(fmt::format("unknown segment '{}'", name));
}

int Multibody::marker_index(std::string_view name) const {
  for (size_t i = 0; i < markers_.size(); ++i) {
    if (markers_[i].name == name) return static_cast<int>(i);
  }
  throw DomainError(fmt::format("unknown marker '{}'", name));
}

}  // namespace exobench
