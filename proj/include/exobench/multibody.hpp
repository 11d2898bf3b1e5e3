#pragma once

#include "exobench/model.hpp"

#include <string_view>
#include <vector>

namespace exobench {

// A KinematicChain flattened into single-dof primitives in topological order.
// Primitive k moves its frame relative to its parent primitive by a fixed
// offset followed by a rotation about (or translation along) its axis.
// Segment frames sit on the last primitive of the segment's joint group.
class Multibody {
 public:
  struct Primitive {
    int parent = -1;  // -1 is ground
    Vec3 offset = Vec3::Zero();
    Vec3 axis = Vec3::UnitX();
    DofKind kind = DofKind::Rotation;
    int slot = 0;      // index into q (coordinate number - 1)
    int segment = -1;  // segment whose frame ends on this primitive, else -1
  };

  struct Marker {
    std::string name;
    int segment = 0;
    Vec3 local = Vec3::Zero();
  };

  struct Cut {
    std::string name;
    int segment_a = 0;
    int segment_b = 0;
    Vec3 anchor_a = Vec3::Zero();
    Vec3 anchor_b = Vec3::Zero();
    std::vector<int> dependent_candidates;  // slots
  };

  // Throws ModelError when the chain is not a solvable tree.
  explicit Multibody(KinematicChain chain);

  const KinematicChain& chain() const { return chain_; }
  int dof() const { return chain_.n_coords; }
  int n_constraints() const { return 3 * static_cast<int>(cuts_.size()); }
  int n_segments() const { return static_cast<int>(chain_.segments.size()); }

  const std::vector<Primitive>& primitives() const { return primitives_; }
  const std::vector<Marker>& markers() const { return markers_; }
  const std::vector<Cut>& cuts() const { return cuts_; }

  int segment_primitive(int segment) const { return segment_primitive_[segment]; }
  int primitive_of_slot(int slot) const { return slot_primitive_[slot]; }
  int segment_index(std::string_view name) const;
  int marker_index(std::string_view name) const;

  // True when primitive `ancestor` lies on the path from ground to `prim`
  // (inclusive).
  bool moves(int ancestor, int prim) const {
    return ancestry_[static_cast<size_t>(prim) * primitives_.size() + ancestor];
  }

  bool is_rotation(int slot) const {
    return primitives_[slot_primitive_[slot]].kind == DofKind::Rotation;
  }

  VecX neutral() const { return VecX::Zero(dof()); }

 private:
  KinematicChain chain_;
  std::vector<Primitive> primitives_;
  std::vector<int> segment_primitive_;
  std::vector<int> slot_primitive_;
  std::vector<Marker> markers_;
  std::vector<Cut> cuts_;
  std::vector<char> ancestry_;
};

}  // namespace exobench
