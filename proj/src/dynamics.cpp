#include "exobench/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include <cmath>

#include "tree.hpp"

namespace exobench {

namespace {

void require_dim(const Multibody& model, const VecX& v, const char* what) {
  if (v.size() != model.dof() || !v.allFinite()) {
    throw DomainError(fmt::format("{} must be finite with {} entries", what, model.dof()));
  }
}

const Wrench* load_for(const ExternalLoads& loads, int segment) {
  if (loads.per_segment.empty()) return nullptr;
  return &loads.per_segment.at(static_cast<size_t>(segment));
}

}  // namespace

VecX open_tree_inverse_dynamics(const Multibody& model, const VecX& q, const VecX& qd,
                                const VecX& qdd, const ExternalLoads& loads,
                                double gravity_scale) {
  require_dim(model, q, "q");
  require_dim(model, qd, "qd");
  require_dim(model, qdd, "qdd");
  if (!loads.empty() && static_cast<int>(loads.per_segment.size()) != model.n_segments()) {
    throw DomainError("external loads must list one wrench per segment");
  }

  const auto& prims = model.primitives();
  const auto poses = detail::compute_poses(model, q);
  const Vec3 base_acc = -gravity_scale * model.chain().gravity;
  const auto motion = detail::compute_motion(model, poses, qd, &qdd, base_acc);

  // Force on each primitive from its parent, and moment about its origin.
  std::vector<Vec3> force(prims.size(), Vec3::Zero());
  std::vector<Vec3> moment(prims.size(), Vec3::Zero());
  for (size_t k = 0; k < prims.size(); ++k) {
    const int s = prims[k].segment;
    if (s < 0) continue;
    const auto& body = model.chain().segments[s];
    const auto& pose = poses[k];
    const auto& m = motion[k];
    const Vec3 r = pose.R * body.com;
    const Mat3 I = pose.R * body.inertia * pose.R.transpose();
    Vec3 f = body.mass * detail::point_acceleration(m, r);
    Vec3 n = I * m.omega_dot + m.omega.cross(I * m.omega);
    if (const Wrench* w = load_for(loads, s)) {
      f -= w->force;
      n -= w->torque;
    }
    force[k] = f;
    moment[k] = n + r.cross(f);
  }

  VecX tau = VecX::Zero(model.dof());
  for (auto k = static_cast<int>(prims.size()) - 1; k >= 0; --k) {
    const auto& p = prims[k];
    const Vec3& a = poses[k].axis;
    tau[p.slot] = p.kind == DofKind::Rotation ? a.dot(moment[k]) : a.dot(force[k]);
    if (p.parent >= 0) {
      force[p.parent] += force[k];
      moment[p.parent] += moment[k] + (poses[k].origin - poses[p.parent].origin).cross(force[k]);
    }
  }
  return tau;
}

MatX mass_matrix(const Multibody& model, const VecX& q) {
  const int n = model.dof();
  const VecX zero = VecX::Zero(n);
  MatX M(n, n);
  for (int j = 0; j < n; ++j) {
    M.col(j) = open_tree_inverse_dynamics(model, q, zero, VecX::Unit(n, j), {}, 0.0);
  }
  return M;
}

VecX nonlinear_effects(const Multibody& model, const VecX& q, const VecX& qd,
                       const ExternalLoads& loads) {
  return open_tree_inverse_dynamics(model, q, qd, VecX::Zero(model.dof()), loads, 1.0);
}

InverseDynamicsResult inverse_dynamics(const Multibody& model,
                                       const CoordinatePartition& partition,
                                       const GeneralizedState& state, const ExternalLoads& loads,
                                       const ConsistencyTolerances& tol) {
  require_dim(model, state.q, "q");
  require_dim(model, state.qd, "qd");
  require_dim(model, state.qdd, "qdd");

  InverseDynamicsResult out;
  out.Q = open_tree_inverse_dynamics(model, state.q, state.qd, state.qdd, loads);
  out.lambda = VecX::Zero(model.n_constraints());
  if (model.n_constraints() == 0) return out;

  const double h = loop_constraints(model, state.q).lpNorm<Eigen::Infinity>();
  if (h > tol.position) {
    throw DomainError(fmt::format("inconsistent constraint: |h| = {:.3e} m exceeds {:.1e}", h,
                                  tol.position));
  }
  const double hdd =
      constraint_acc_residual(model, state.q, state.qd, state.qdd).lpNorm<Eigen::Infinity>();
  if (hdd > tol.acceleration) {
    throw DomainError(fmt::format("inconsistent constraint: |hddot| = {:.3e} m/s^2 exceeds {:.1e}",
                                  hdd, tol.acceleration));
  }

  const MatX J = constraint_jacobian(model, state.q);
  const auto n_dep = static_cast<Eigen::Index>(partition.dependent.size());
  if (n_dep != J.rows()) throw DomainError("partition does not match the constraint count");
  MatX Jdep_t(n_dep, n_dep);
  VecX rhs(n_dep);
  for (Eigen::Index i = 0; i < n_dep; ++i) {
    Jdep_t.row(i) = J.col(partition.dependent[i]).transpose();
    rhs[i] = out.Q[partition.dependent[i]];
  }
  Eigen::FullPivLU<MatX> lu(Jdep_t);
  if (!lu.isInvertible()) throw SolverError("singular dependent constraint Jacobian");
  out.lambda = lu.solve(rhs);
  out.Q -= J.transpose() * out.lambda;
  for (int s : partition.dependent) out.Q[s] = 0.0;
  return out;
}

ForwardDynamicsResult forward_dynamics(const Multibody& model, const VecX& q, const VecX& qd,
                                       const VecX& Q, const ExternalLoads& loads,
                                       const Stabilization& stab,
                                       const ConsistencyTolerances& tol) {
  require_dim(model, q, "q");
  require_dim(model, qd, "qd");
  require_dim(model, Q, "Q");

  const MatX M = mass_matrix(model, q);
  const VecX b = Q - nonlinear_effects(model, q, qd, loads);
  Eigen::LDLT<MatX> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    throw SolverError("singular KKT system: mass matrix is not positive definite");
  }

  ForwardDynamicsResult out;
  out.lambda = VecX::Zero(model.n_constraints());
  if (model.n_constraints() == 0) {
    out.qdd = ldlt.solve(b);
    return out;
  }

  const VecX h = loop_constraints(model, q);
  const MatX J = constraint_jacobian(model, q);
  const VecX hdot = J * qd;
  const bool stabilized = stab.alpha != 0.0 || stab.beta != 0.0;
  if (!stabilized) {
    if (h.lpNorm<Eigen::Infinity>() > tol.position) {
      throw DomainError(fmt::format("inconsistent constraint: |h| = {:.3e} m",
                                    h.lpNorm<Eigen::Infinity>()));
    }
    if (hdot.lpNorm<Eigen::Infinity>() > tol.velocity) {
      throw DomainError(fmt::format("inconsistent constraint: |J qd| = {:.3e} m/s",
                                    hdot.lpNorm<Eigen::Infinity>()));
    }
  }
  const VecX gamma = -constraint_bias(model, q, qd) - 2.0 * stab.alpha * hdot -
                     stab.beta * stab.beta * h;

  const VecX Minv_b = ldlt.solve(b);
  const MatX Minv_Jt = ldlt.solve(J.transpose());
  const MatX S = J * Minv_Jt;
  Eigen::FullPivLU<MatX> lu(S);
  if (!lu.isInvertible()) throw SolverError("singular KKT system: constraint Jacobian is rank deficient");
  out.lambda = lu.solve(gamma - J * Minv_b);
  out.qdd = Minv_b + Minv_Jt * out.lambda;
  return out;
}

std::vector<GeneralizedState> simulate(const Multibody& model, const VecX& q0, const VecX& qd0,
                                       const TorqueLaw& torque, double dt, int steps,
                                       const ExternalLoads& loads, const Stabilization& stab) {
  if (!(dt > 0.0) || steps < 0) throw DomainError("simulate needs dt > 0 and steps >= 0");
  std::vector<GeneralizedState> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  VecX q = q0;
  VecX qd = qd0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const VecX Q = torque ? torque(t, q, qd) : VecX::Zero(model.dof());
    const auto fd = forward_dynamics(model, q, qd, Q, loads, stab);
    out.push_back({t, q, qd, fd.qdd});
    if (k == steps) break;
    qd += dt * fd.qdd;
    q += dt * qd;
  }
  return out;
}

double kinetic_energy(const Multibody& model, const VecX& q, const VecX& qd) {
  require_dim(model, q, "q");
  require_dim(model, qd, "qd");
  const auto poses = detail::compute_poses(model, q);
  const auto motion = detail::compute_motion(model, poses, qd, nullptr, Vec3::Zero());
  double ke = 0.0;
  for (int s = 0; s < model.n_segments(); ++s) {
    const int k = model.segment_primitive(s);
    const auto& body = model.chain().segments[s];
    const Vec3 r = poses[k].R * body.com;
    const Vec3 v = motion[k].vel + motion[k].omega.cross(r);
    const Mat3 I = poses[k].R * body.inertia * poses[k].R.transpose();
    ke += 0.5 * body.mass * v.squaredNorm() + 0.5 * motion[k].omega.dot(I * motion[k].omega);
  }
  return ke;
}

double potential_energy(const Multibody& model, const VecX& q) {
  require_dim(model, q, "q");
  const auto poses = detail::compute_poses(model, q);
  double pe = 0.0;
  for (int s = 0; s < model.n_segments(); ++s) {
    const auto& body = model.chain().segments[s];
    const Vec3 c = detail::point_world(detail::segment_pose(model, poses, s), body.com);
    pe -= body.mass * model.chain().gravity.dot(c);
  }
  return pe;
}

JointTorqueSeries inverse_dynamics_series(const Multibody& model,
                                          const CoordinatePartition& partition,
                                          const std::vector<GeneralizedState>& states,
                                          const ExternalLoads& loads) {
  JointTorqueSeries out;
  for (size_t k = 0; k < states.size(); ++k) {
    InverseDynamicsResult r;
    try {
      r = inverse_dynamics(model, partition, states[k], loads);
    } catch (const Error& e) {
      throw DomainError(fmt::format("frame {}: {}", k, e.what()));
    }
    out.t.push_back(states[k].t);
    out.Q.push_back(std::move(r.Q));
    out.lambda.push_back(std::move(r.lambda));
  }
  return out;
}

PowerSeries joint_power(const JointTorqueSeries& torques, const std::vector<VecX>& qd) {
  if (torques.Q.size() != qd.size() || torques.t.size() != qd.size()) {
    throw DomainError(fmt::format("power: {} torque samples but {} velocity samples",
                                  torques.Q.size(), qd.size()));
  }
  PowerSeries out;
  out.t = torques.t;
  for (size_t k = 0; k < qd.size(); ++k) {
    if (torques.Q[k].size() != qd[k].size()) throw DomainError("power: dimension mismatch");
    VecX p = torques.Q[k].cwiseProduct(qd[k]);
    out.total.push_back(p.sum());
    out.per_coord.push_back(std::move(p));
  }
  return out;
}

namespace {
template <typename F>
double trapezoid(const PowerSeries& power, F&& integrand) {
  if (power.t.size() != power.total.size()) throw DomainError("power series is ragged");
  if (power.t.size() < 2) throw DomainError("energy needs >= 2 samples");
  double e = 0.0;
  for (size_t k = 1; k < power.t.size(); ++k) {
    e += 0.5 * (power.t[k] - power.t[k - 1]) *
         (integrand(power.total[k]) + integrand(power.total[k - 1]));
  }
  return e;
}
}  // namespace

double energy(const PowerSeries& power) {
  return trapezoid(power, [](double p) { return std::abs(p); });
}

double net_work(const PowerSeries& power) {
  return trapezoid(power, [](double p) { return p; });
}

}  // namespace exobench
