#pragma once

#include "exobench/kinematics.hpp"

#include <functional>
#include <vector>

namespace exobench {

struct JointTorqueSeries {
  std::vector<double> t;
  std::vector<VecX> Q;       // generalized forces, N m or N
  std::vector<VecX> lambda;  // cut-joint multipliers, N
};

struct PowerSeries {
  std::vector<double> t;
  std::vector<VecX> per_coord;  // W
  std::vector<double> total;    // W
};

// Generalized forces of the cut-open tree: M(q) qdd + C(q, qd). gravity_scale
// multiplies chain().gravity (0 disables it).
VecX open_tree_inverse_dynamics(const Multibody& model, const VecX& q, const VecX& qd,
                                const VecX& qdd, const ExternalLoads& loads = {},
                                double gravity_scale = 1.0);

// Built column by column from unit-acceleration inverse dynamics.
MatX mass_matrix(const Multibody& model, const VecX& q);

// Gyroscopic, centrifugal, gravity and external-load terms (qdd = 0).
VecX nonlinear_effects(const Multibody& model, const VecX& q, const VecX& qd,
                       const ExternalLoads& loads = {});

struct ConsistencyTolerances {
  double position = 1e-8;      // ||h||_inf, m
  double velocity = 1e-8;      // ||J qd||_inf, m/s
  double acceleration = 1e-6;  // ||hddot||_inf, m/s^2
};

struct InverseDynamicsResult {
  VecX Q;       // dependent rows are zero
  VecX lambda;  // one triple per loop cut
};

// Solves the multipliers so that the dependent coordinates carry no actuation:
// lambda = J_dep^-T Q_open,dep and Q = Q_open - J^T lambda.
// Throws DomainError when the state violates the loop constraints.
InverseDynamicsResult inverse_dynamics(const Multibody& model,
                                       const CoordinatePartition& partition,
                                       const GeneralizedState& state,
                                       const ExternalLoads& loads = {},
                                       const ConsistencyTolerances& tol = {});

struct ForwardDynamicsResult {
  VecX qdd;
  VecX lambda;
};

// Baumgarte gains; zero leaves the plain index-reduced system.
struct Stabilization {
  double alpha = 0.0;  // 1/s
  double beta = 0.0;   // 1/s
};

// Solves [M -J^T; J 0][qdd; lambda] = [Q - C; -Jdot qd - 2 alpha hdot - beta^2 h].
ForwardDynamicsResult forward_dynamics(const Multibody& model, const VecX& q, const VecX& qd,
                                       const VecX& Q, const ExternalLoads& loads = {},
                                       const Stabilization& stab = {},
                                       const ConsistencyTolerances& tol = {});

using TorqueLaw = std::function<VecX(double t, const VecX& q, const VecX& qd)>;

// Semi-implicit Euler; loop constraints stabilized with alpha = beta = 10 1/s.
std::vector<GeneralizedState> simulate(const Multibody& model, const VecX& q0, const VecX& qd0,
                                       const TorqueLaw& torque, double dt, int steps,
                                       const ExternalLoads& loads = {},
                                       const Stabilization& stab = {10.0, 10.0});

// Summed over segments directly from body velocities.
double kinetic_energy(const Multibody& model, const VecX& q, const VecX& qd);
double potential_energy(const Multibody& model, const VecX& q);

// Runs inverse_dynamics over every state of a differentiated trajectory.
JointTorqueSeries inverse_dynamics_series(const Multibody& model,
                                          const CoordinatePartition& partition,
                                          const std::vector<GeneralizedState>& states,
                                          const ExternalLoads& loads = {});

// P_i = Q_i * qd_i for every coordinate.
PowerSeries joint_power(const JointTorqueSeries& torques, const std::vector<VecX>& qd);

// Trapezoidal integral of |P_total(t)|, J.
double energy(const PowerSeries& power);

// Trapezoidal integral of the signed P_total(t), J.
double net_work(const PowerSeries& power);

}  // namespace exobench
