#pragma once

// Recursive pose and motion propagation over Multibody primitives. Shared by
// the kinematics and dynamics translation units.

#include "exobench/multibody.hpp"

#include <Eigen/Geometry>

#include <vector>

namespace exobench::detail {

struct FramePose {
  Mat3 R = Mat3::Identity();
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();  // world-frame joint axis
};

// World-frame velocities and accelerations of each primitive frame origin.
struct FrameMotion {
  Vec3 omega = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
};

std::vector<FramePose> compute_poses(const Multibody& model, const VecX& q);

// qdd may be null (treated as zero). base_acc is the linear acceleration
// imposed on ground; pass -gravity to fold gravity into the sweep.
std::vector<FrameMotion> compute_motion(const Multibody& model,
                                        const std::vector<FramePose>& poses,
                                        const VecX& qd, const VecX* qdd,
                                        const Vec3& base_acc);

inline const FramePose& segment_pose(const Multibody& model,
                                     const std::vector<FramePose>& poses, int segment) {
  return poses[model.segment_primitive(segment)];
}

inline Vec3 point_world(const FramePose& pose, const Vec3& local) {
  return pose.origin + pose.R * local;
}

// Classical acceleration of a point fixed in the frame.
inline Vec3 point_acceleration(const FrameMotion& m, const Vec3& r) {
  return m.acc + m.omega_dot.cross(r) + m.omega.cross(m.omega.cross(r));
}

// Adds d(point)/dq into the 3 x dof block `out` for a point fixed on the
// frame of primitive `prim`, scaled by `sign`.
template <typename Block>
void accumulate_point_jacobian(const Multibody& model, const std::vector<FramePose>& poses,
                               int prim, const Vec3& point, double sign, Block&& out) {
  for (int j = prim; j >= 0; j = model.primitives()[j].parent) {
    const auto& p = model.primitives()[j];
    const Vec3& a = poses[j].axis;
    const Vec3 col = p.kind == DofKind::Rotation ? Vec3(a.cross(point - poses[j].origin)) : a;
    out.col(p.slot) += sign * col;
  }
}

}  // namespace exobench::detail
