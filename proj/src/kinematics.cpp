#include "exobench/kinematics.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tree.hpp"

namespace exobench {

namespace detail {

std::vector<FramePose> compute_poses(const Multibody& model, const VecX& q) {
  const auto& prims = model.primitives();
  std::vector<FramePose> poses(prims.size());
  for (size_t k = 0; k < prims.size(); ++k) {
    const auto& p = prims[k];
    const FramePose parent = p.parent < 0 ? FramePose{} : poses[p.parent];
    FramePose& f = poses[k];
    f.axis = parent.R * p.axis;
    f.origin = parent.origin + parent.R * p.offset;
    const double value = q[p.slot];
    if (p.kind == DofKind::Rotation) {
      f.R = parent.R * Eigen::AngleAxisd(value, p.axis).toRotationMatrix();
    } else {
      f.R = parent.R;
      f.origin += f.axis * value;
    }
  }
  return poses;
}

std::vector<FrameMotion> compute_motion(const Multibody& model,
                                        const std::vector<FramePose>& poses, const VecX& qd,
                                        const VecX* qdd, const Vec3& base_acc) {
  const auto& prims = model.primitives();
  std::vector<FrameMotion> motion(prims.size());
  FrameMotion ground;
  ground.acc = base_acc;
  for (size_t k = 0; k < prims.size(); ++k) {
    const auto& p = prims[k];
    const FrameMotion& pm = p.parent < 0 ? ground : motion[p.parent];
    const Vec3 parent_origin = p.parent < 0 ? Vec3::Zero() : poses[p.parent].origin;
    const Vec3 d = poses[k].origin - parent_origin;
    const Vec3& a = poses[k].axis;
    const double rate = qd[p.slot];
    const double accel = qdd ? (*qdd)[p.slot] : 0.0;

    FrameMotion& m = motion[k];
    m.vel = pm.vel + pm.omega.cross(d);
    m.acc = pm.acc + pm.omega_dot.cross(d) + pm.omega.cross(pm.omega.cross(d));
    if (p.kind == DofKind::Rotation) {
      m.omega = pm.omega + a * rate;
      m.omega_dot = pm.omega_dot + a * accel + pm.omega.cross(a * rate);
    } else {
      m.omega = pm.omega;
      m.omega_dot = pm.omega_dot;
      m.vel += a * rate;
      m.acc += 2.0 * pm.omega.cross(a * rate) + a * accel;
    }
  }
  return motion;
}

}  // namespace detail

namespace {

void check_dim(const Multibody& model, const VecX& v, const char* what) {
  if (v.size() != model.dof()) {
    throw DomainError(fmt::format("{} has dimension {}, model has {} coordinates", what,
                                  v.size(), model.dof()));
  }
}

MatX columns(const MatX& m, const std::vector<int>& cols) {
  MatX out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  return out;
}

double condition_number(const MatX& m) {
  Eigen::JacobiSVD<MatX> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s[s.size() - 1];
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

void combinations(int n, int k, int start, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

FkResult forward_kinematics(const Multibody& model, const VecX& q) {
  check_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  FkResult out;
  for (int s = 0; s < model.n_segments(); ++s) {
    const auto& f = detail::segment_pose(model, poses, s);
    out.poses.push_back({s, f.R, f.origin});
  }
  for (const auto& m : model.markers()) {
    out.markers[m.name] = detail::point_world(detail::segment_pose(model, poses, m.segment), m.local);
  }
  return out;
}

std::vector<Vec3> marker_positions(const Multibody& model, const VecX& q) {
  check_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  std::vector<Vec3> out;
  out.reserve(model.markers().size());
  for (const auto& m : model.markers()) {
    out.push_back(detail::point_world(detail::segment_pose(model, poses, m.segment), m.local));
  }
  return out;
}

MatX marker_jacobian(const Multibody& model, const VecX& q) {
  check_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  const auto& markers = model.markers();
  MatX J = MatX::Zero(3 * static_cast<Eigen::Index>(markers.size()), model.dof());
  for (size_t i = 0; i < markers.size(); ++i) {
    const int prim = model.segment_primitive(markers[i].segment);
    const Vec3 p = detail::point_world(poses[prim], markers[i].local);
    detail::accumulate_point_jacobian(model, poses, prim, p, 1.0,
                                      J.middleRows(3 * static_cast<Eigen::Index>(i), 3));
  }
  return J;
}

VecX loop_constraints(const Multibody& model, const VecX& q) {
  check_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  VecX h(model.n_constraints());
  for (size_t c = 0; c < model.cuts().size(); ++c) {
    const auto& cut = model.cuts()[c];
    const Vec3 pa = detail::point_world(detail::segment_pose(model, poses, cut.segment_a), cut.anchor_a);
    const Vec3 pb = detail::point_world(detail::segment_pose(model, poses, cut.segment_b), cut.anchor_b);
    h.segment<3>(3 * static_cast<Eigen::Index>(c)) = pa - pb;
  }
  return h;
}

MatX constraint_jacobian(const Multibody& model, const VecX& q) {
  check_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  MatX J = MatX::Zero(model.n_constraints(), model.dof());
  for (size_t c = 0; c < model.cuts().size(); ++c) {
    const auto& cut = model.cuts()[c];
    const int pa = model.segment_primitive(cut.segment_a);
    const int pb = model.segment_primitive(cut.segment_b);
    auto block = J.middleRows(3 * static_cast<Eigen::Index>(c), 3);
    detail::accumulate_point_jacobian(model, poses, pa,
                                      detail::point_world(poses[pa], cut.anchor_a), 1.0, block);
    detail::accumulate_point_jacobian(model, poses, pb,
                                      detail::point_world(poses[pb], cut.anchor_b), -1.0, block);
  }
  return J;
}

namespace {

VecX anchor_acceleration_difference(const Multibody& model, const VecX& q, const VecX& qd,
                                    const VecX* qdd) {
  const auto poses = detail::compute_poses(model, q);
  const auto motion = detail::compute_motion(model, poses, qd, qdd, Vec3::Zero());
  VecX out(model.n_constraints());
  for (size_t c = 0; c < model.cuts().size(); ++c) {
    const auto& cut = model.cuts()[c];
    const int pa = model.segment_primitive(cut.segment_a);
    const int pb = model.segment_primitive(cut.segment_b);
    const Vec3 ra = poses[pa].R * cut.anchor_a;
    const Vec3 rb = poses[pb].R * cut.anchor_b;
    out.segment<3>(3 * static_cast<Eigen::Index>(c)) =
        detail::point_acceleration(motion[pa], ra) - detail::point_acceleration(motion[pb], rb);
  }
  return out;
}

}  // namespace

VecX constraint_bias(const Multibody& model, const VecX& q, const VecX& qd) {
  check_dim(model, q, "q");
  check_dim(model, qd, "qd");
  return anchor_acceleration_difference(model, q, qd, nullptr);
}

VecX constraint_acc_residual(const Multibody& model, const VecX& q, const VecX& qd,
                             const VecX& qdd) {
  check_dim(model, q, "q");
  check_dim(model, qd, "qd");
  check_dim(model, qdd, "qdd");
  return anchor_acceleration_difference(model, q, qd, &qdd);
}

CoordinatePartition choose_partition(const Multibody& model) {
  CoordinatePartition part;
  if (model.cuts().empty()) {
    for (int s = 0; s < model.dof(); ++s) part.independent.push_back(s);
    return part;
  }
  const MatX J = constraint_jacobian(model, model.neutral());
  std::vector<bool> taken(model.dof(), false);
  for (size_t c = 0; c < model.cuts().size(); ++c) {
    const auto& cut = model.cuts()[c];
    const MatX rows = J.middleRows(3 * static_cast<Eigen::Index>(c), 3);
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    combinations(static_cast<int>(cut.dependent_candidates.size()), 3, 0, cur, subsets);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_slots;
    for (const auto& subset : subsets) {
      std::vector<int> slots;
      for (int i : subset) slots.push_back(cut.dependent_candidates[i]);
      if (std::any_of(slots.begin(), slots.end(), [&](int s) { return taken[s]; })) continue;
      const double cond = condition_number(columns(rows, slots));
      if (cond < best) {
        best = cond;
        best_slots = slots;
      }
    }
    if (best_slots.empty() || !(best < 1e12)) {
      throw ModelError(fmt::format("loop cut '{}': no invertible dependent block among candidates",
                                   cut.name));
    }
    for (int s : best_slots) {
      taken[s] = true;
      part.dependent.push_back(s);
    }
  }
  std::sort(part.dependent.begin(), part.dependent.end());
  for (int s = 0; s < model.dof(); ++s) {
    if (!taken[s]) part.independent.push_back(s);
  }
  if (condition_number(columns(J, part.dependent)) >= 1e12) {
    throw ModelError("combined dependent block is singular at the neutral pose");
  }
  return part;
}

ClosureResult solve_closure(const Multibody& model, const VecX& q_guess,
                            const CoordinatePartition& partition, const ClosureOptions& options) {
  check_dim(model, q_guess, "q");
  if (!q_guess.allFinite()) throw DomainError("closure initial guess is not finite");
  ClosureResult result{q_guess, 0, 0.0};
  if (partition.dependent.empty()) return result;

  VecX h = loop_constraints(model, result.q);
  result.residual = h.lpNorm<Eigen::Infinity>();
  while (result.residual > options.tolerance) {
    if (result.iterations >= options.max_iterations) {
      throw SolverError(fmt::format("loop closure did not converge in {} iterations (|h| = {:.3e} m)",
                                    options.max_iterations, result.residual));
    }
    const MatX Jdep = columns(constraint_jacobian(model, result.q), partition.dependent);
    Eigen::FullPivLU<MatX> lu(Jdep);
    const double cond = condition_number(Jdep);
    if (!lu.isInvertible() || cond > options.max_condition) {
      throw SolverError(fmt::format("loop closure: dependent Jacobian is singular (cond {:.3e})", cond));
    }
    const VecX step = lu.solve(h);

    // Backtrack when the full Newton step increases the residual.
    double scale = 1.0;
    VecX trial = result.q;
    double trial_res = 0.0;
    VecX trial_h;
    for (int attempt = 0; attempt < 8; ++attempt) {
      trial = result.q;
      for (size_t i = 0; i < partition.dependent.size(); ++i) {
        trial[partition.dependent[i]] -= scale * step[static_cast<Eigen::Index>(i)];
      }
      trial_h = loop_constraints(model, trial);
      trial_res = trial_h.lpNorm<Eigen::Infinity>();
      if (std::isfinite(trial_res) && trial_res < result.residual) break;
      scale *= 0.5;
    }
    result.q = trial;
    h = trial_h;
    result.residual = trial_res;
    ++result.iterations;
    if (!std::isfinite(result.residual)) throw SolverError("loop closure diverged");
  }
  return result;
}

MatX dependent_sensitivity(const Multibody& model, const CoordinatePartition& partition,
                           const VecX& q) {
  const MatX J = constraint_jacobian(model, q);
  const MatX Jdep = columns(J, partition.dependent);
  const MatX Jind = columns(J, partition.independent);
  return -Jdep.fullPivLu().solve(Jind);
}

VecX project_velocity(const Multibody& model, const CoordinatePartition& partition,
                      const VecX& q, const VecX& qd) {
  check_dim(model, qd, "qd");
  if (partition.dependent.empty()) return qd;
  const MatX J = constraint_jacobian(model, q);
  VecX ind(static_cast<Eigen::Index>(partition.independent.size()));
  for (size_t i = 0; i < partition.independent.size(); ++i) ind[static_cast<Eigen::Index>(i)] = qd[partition.independent[i]];
  const VecX rhs = -columns(J, partition.independent) * ind;
  const VecX dep = columns(J, partition.dependent).fullPivLu().solve(rhs);
  VecX out = qd;
  for (size_t i = 0; i < partition.dependent.size(); ++i) out[partition.dependent[i]] = dep[static_cast<Eigen::Index>(i)];
  return out;
}

VecX project_acceleration(const Multibody& model, const CoordinatePartition& partition,
                          const VecX& q, const VecX& qd, const VecX& qdd) {
  check_dim(model, qdd, "qdd");
  if (partition.dependent.empty()) return qdd;
  const MatX J = constraint_jacobian(model, q);
  VecX ind(static_cast<Eigen::Index>(partition.independent.size()));
  for (size_t i = 0; i < partition.independent.size(); ++i) ind[static_cast<Eigen::Index>(i)] = qdd[partition.independent[i]];
  const VecX rhs = -columns(J, partition.independent) * ind - constraint_bias(model, q, qd);
  const VecX dep = columns(J, partition.dependent).fullPivLu().solve(rhs);
  VecX out = qdd;
  for (size_t i = 0; i < partition.dependent.size(); ++i) out[partition.dependent[i]] = dep[static_cast<Eigen::Index>(i)];
  return out;
}

}  // namespace exobench
