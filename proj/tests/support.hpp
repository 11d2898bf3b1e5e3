#pragma once

#include "exobench/kinematics.hpp"
#include "exobench/model.hpp"
#include "exobench/multibody.hpp"

#include <random>
#include <string>

namespace exobench::test {

inline std::string data_path(const std::string& rel) { return std::string(EXOBENCH_DATA_DIR) + "/" + rel; }

struct PendulumParams {
  double mass = 1.3;
  double length = 0.4;  // hinge to com
  double izz = 0.02;    // about the com
};

// One rigid bob hanging from a Z hinge at the origin, gravity along -Y.
inline KinematicChain pendulum_chain(const PendulumParams& p = {}) {
  KinematicChain chain;
  chain.name = "pendulum";
  chain.n_coords = 1;
  SegmentInertia bob;
  bob.name = "bob";
  bob.mass = p.mass;
  bob.com = Vec3(0.0, -p.length, 0.0);
  bob.inertia = Vec3(0.015, 0.01, p.izz).asDiagonal();
  chain.segments.push_back(bob);
  JointSpec hinge;
  hinge.name = "hinge";
  hinge.parent = "ground";
  hinge.child = "bob";
  hinge.dofs.push_back(DofSpec{1, Axis::Z, DofKind::Rotation, "swing", std::nullopt, true});
  chain.joints.push_back(hinge);
  chain.markers.push_back({"tip", "bob", Vec3(0.0, -2.0 * p.length, 0.0)});
  return chain;
}

// Random closed configuration near neutral: independents drawn in +-spread,
// dependents solved by closure.
inline VecX random_closed_q(const Multibody& model, const CoordinatePartition& partition, std::mt19937_64& rng,
                            double spread = 0.3) {
  std::uniform_real_distribution<double> u(-spread, spread);
  VecX q = model.neutral();
  for (int s : partition.independent) q[s] = model.is_rotation(s) ? u(rng) : 0.1 * u(rng);
  return solve_closure(model, q, partition).q;
}

}  // namespace exobench::test
