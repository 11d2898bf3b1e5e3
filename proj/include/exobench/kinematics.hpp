#pragma once

#include "exobench/multibody.hpp"

#include <map>
#include <string>
#include <vector>

namespace exobench {

struct BodyPose {
  int segment = 0;
  Mat3 rotation = Mat3::Identity();  // world <- local
  Vec3 position = Vec3::Zero();      // m, world
};

struct FkResult {
  std::vector<BodyPose> poses;  // indexed like chain().segments
  std::map<std::string, Vec3> markers;
};

FkResult forward_kinematics(const Multibody& model, const VecX& q);

// World marker positions in model.markers() order.
std::vector<Vec3> marker_positions(const Multibody& model, const VecX& q);

// Rows 3*m..3*m+2 hold d(marker m)/dq.
MatX marker_jacobian(const Multibody& model, const VecX& q);

// h(q): anchor on body_a minus anchor on body_b, stacked per cut.
VecX loop_constraints(const Multibody& model, const VecX& q);

// dh/dq, n_constraints x dof.
MatX constraint_jacobian(const Multibody& model, const VecX& q);

// Jdot(q, qd) * qd.
VecX constraint_bias(const Multibody& model, const VecX& q, const VecX& qd);

// hddot = J qdd + Jdot qd.
VecX constraint_acc_residual(const Multibody& model, const VecX& q, const VecX& qd,
                             const VecX& qdd);

struct CoordinatePartition {
  std::vector<int> independent;  // slots (coordinate number - 1)
  std::vector<int> dependent;

  bool operator==(const CoordinatePartition&) const = default;
};

// Picks, per loop cut, the candidate subset whose constraint-Jacobian block is
// best conditioned at the neutral pose. Throws ModelError if none is invertible.
CoordinatePartition choose_partition(const Multibody& model);

struct ClosureOptions {
  double tolerance = 1e-10;  // on ||h||_inf, m
  int max_iterations = 50;
  double max_condition = 1e12;
};

struct ClosureResult {
  VecX q;
  int iterations = 0;
  double residual = 0.0;  // ||h||_inf
};

// Newton-Raphson on the dependent coordinates with independents held fixed.
// Throws SolverError on non-convergence or a singular dependent block.
ClosureResult solve_closure(const Multibody& model, const VecX& q_guess,
                            const CoordinatePartition& partition,
                            const ClosureOptions& options = {});

// Fills dependent velocities so that J qd = 0.
VecX project_velocity(const Multibody& model, const CoordinatePartition& partition,
                      const VecX& q, const VecX& qd);

// Fills dependent accelerations so that J qdd + Jdot qd = 0.
VecX project_acceleration(const Multibody& model, const CoordinatePartition& partition,
                          const VecX& q, const VecX& qd, const VecX& qdd);

// d q_dep / d q_ind = -J_dep^-1 J_ind.
MatX dependent_sensitivity(const Multibody& model, const CoordinatePartition& partition,
                           const VecX& q);

}  // namespace exobench
