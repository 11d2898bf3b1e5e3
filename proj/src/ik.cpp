#include "exobench/ik.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <algorithm>
#include <set>

namespace exobench {

FrameError::FrameError(size_t frame_index, const std::string& what)
    : SolverError(fmt::format("frame {}: {}", frame_index, what)), frame(frame_index) {}

void MarkerTrajectory::validate(double spacing_tolerance) const {
  if (frames.empty()) throw DomainError("marker trajectory has no frames");
  if (!(sample_rate > 0.0)) throw DomainError("marker trajectory sample rate must be positive");
  const double dt = 1.0 / sample_rate;
  for (size_t k = 0; k < frames.size(); ++k) {
    for (const auto& [name, p] : frames[k].positions) {
      if (!p.allFinite()) throw DomainError(fmt::format("frame {}: marker {} is not finite", k, name));
    }
    if (k == 0) continue;
    const double step = frames[k].t - frames[k - 1].t;
    if (!(step > 0.0)) throw DomainError(fmt::format("frame {}: time is not strictly increasing", k));
    if (std::abs(step - dt) > spacing_tolerance) {
      throw DomainError(fmt::format("frame {}: spacing {} s differs from 1/sample_rate = {} s", k,
                                    step, dt));
    }
  }
}

namespace {

struct PresentMarkers {
  std::vector<int> index;  // into model.markers()
  std::vector<Vec3> measured;
};

PresentMarkers select_markers(const Multibody& model, const MarkerFrame& frame) {
  PresentMarkers out;
  std::set<int> segments;
  const auto& markers = model.markers();
  for (size_t i = 0; i < markers.size(); ++i) {
    auto it = frame.positions.find(markers[i].name);
    if (it == frame.positions.end()) continue;
    out.index.push_back(static_cast<int>(i));
    out.measured.push_back(it->second);
    segments.insert(markers[i].segment);
  }
  if (out.index.size() < 4 || segments.size() < 2) {
    throw DomainError(fmt::format("too few markers: {} present on {} segments (need >= 4 on >= 2)",
                                  out.index.size(), segments.size()));
  }
  return out;
}

VecX residual_vector(const Multibody& model, const PresentMarkers& present, const VecX& q) {
  const auto world = marker_positions(model, q);
  VecX r(3 * static_cast<Eigen::Index>(present.index.size()));
  for (size_t i = 0; i < present.index.size(); ++i) {
    r.segment<3>(3 * static_cast<Eigen::Index>(i)) = world[present.index[i]] - present.measured[i];
  }
  return r;
}

double proximal_term(const CoordinatePartition& partition, const VecX& q, const VecX& ref, double w) {
  double s = 0.0;
  for (int i : partition.independent) s += (q[i] - ref[i]) * (q[i] - ref[i]);
  return w * s;
}

MatX reduced_jacobian(const Multibody& model, const CoordinatePartition& partition,
                      const PresentMarkers& present, const VecX& q) {
  const MatX full = marker_jacobian(model, q);
  const auto n_rows = 3 * static_cast<Eigen::Index>(present.index.size());
  const auto n_ind = static_cast<Eigen::Index>(partition.independent.size());
  MatX Jm(n_rows, model.dof());
  for (size_t i = 0; i < present.index.size(); ++i) {
    Jm.middleRows(3 * static_cast<Eigen::Index>(i), 3) = full.middleRows(3 * present.index[i], 3);
  }
  MatX Jr(n_rows, n_ind);
  for (Eigen::Index c = 0; c < n_ind; ++c) Jr.col(c) = Jm.col(partition.independent[c]);
  if (!partition.dependent.empty()) {
    const MatX S = dependent_sensitivity(model, partition, q);
    MatX Jdep(n_rows, static_cast<Eigen::Index>(partition.dependent.size()));
    for (size_t c = 0; c < partition.dependent.size(); ++c) {
      Jdep.col(static_cast<Eigen::Index>(c)) = Jm.col(partition.dependent[c]);
    }
    Jr += Jdep * S;
  }
  return Jr;
}

}  // namespace

IkFrameResult inverse_kinematics_frame(const Multibody& model,
                                       const CoordinatePartition& partition,
                                       const MarkerFrame& frame, const VecX& q_init,
                                       const IkOptions& options) {
  if (q_init.size() != model.dof() || !q_init.allFinite()) {
    throw DomainError("IK initial guess must be finite with one entry per coordinate");
  }
  const PresentMarkers present = select_markers(model, frame);

  IkFrameResult out;
  out.markers_used = static_cast<int>(present.index.size());
  const double w = options.proximal_weight;
  VecX q = solve_closure(model, q_init, partition, options.closure).q;
  const VecX ref = q;
  VecX r = residual_vector(model, present, q);
  double f = r.squaredNorm();
  double F = f;
  if (options.record_history) out.history.push_back(f);

  const auto n_ind = static_cast<Eigen::Index>(partition.independent.size());
  double mu = options.initial_damping;
  bool converged = false;

  while (!converged) {
    if (out.iterations >= options.max_iterations) {
      throw SolverError(fmt::format("IK did not converge in {} iterations (f = {:.3e} m^2)",
                                    options.max_iterations, f));
    }
    const MatX Jr = reduced_jacobian(model, partition, present, q);
    const MatX A = Jr.transpose() * Jr + w * MatX::Identity(n_ind, n_ind);
    VecX g = Jr.transpose() * r;
    for (Eigen::Index i = 0; i < n_ind; ++i) {
      g[i] += w * (q[partition.independent[i]] - ref[partition.independent[i]]);
    }

    while (true) {
      ++out.iterations;
      const MatX damped = A + mu * MatX::Identity(n_ind, n_ind);
      const VecX step = -damped.ldlt().solve(g);
      if (!step.allFinite()) throw SolverError("IK normal equations produced a non-finite step");
      if (step.norm() < options.step_tolerance) {
        converged = true;
        break;
      }

      VecX trial = q;
      for (Eigen::Index i = 0; i < n_ind; ++i) trial[partition.independent[i]] += step[i];
      bool closed = true;
      try {
        trial = solve_closure(model, trial, partition, options.closure).q;
      } catch (const SolverError&) {
        closed = false;
      }

      if (closed) {
        const VecX r_trial = residual_vector(model, present, trial);
        const double f_trial = r_trial.squaredNorm();
        const double F_trial = f_trial + proximal_term(partition, trial, ref, w);
        if (F_trial < F) {
          const double rel = (F - F_trial) / F;
          q = trial;
          r = r_trial;
          f = f_trial;
          F = F_trial;
          mu = std::max(mu / 10.0, 1e-15);
          if (options.record_history) out.history.push_back(f);
          if (rel < options.relative_tolerance) converged = true;
          break;
        }
      }
      mu *= 10.0;
      if (out.iterations >= options.max_iterations) break;
    }
  }

  out.q = q;
  out.residual = f;
  out.constraint_norm = model.n_constraints() > 0 ? loop_constraints(model, q).lpNorm<Eigen::Infinity>() : 0.0;
  return out;
}

IkSolution inverse_kinematics_trajectory(const Multibody& model,
                                         const CoordinatePartition& partition,
                                         const MarkerTrajectory& trajectory,
                                         const IkTrajectoryOptions& options) {
  trajectory.validate();
  const size_t n = trajectory.frames.size();
  IkSolution sol;
  sol.states.resize(n);
  sol.residual.assign(n, 0.0);
  sol.constraint_norm.assign(n, 0.0);
  sol.iterations.assign(n, 0);

  std::vector<bool> ok(n, false);
  VecX warm = model.neutral();
  for (size_t k = 0; k < n; ++k) {
    const auto& frame = trajectory.frames[k];
    for (const auto& m : model.markers()) {
      if (!frame.positions.count(m.name)) ++sol.missing_markers;
    }
    auto& state = sol.states[k];
    state.t = frame.t;
    state.qd = VecX::Zero(model.dof());
    state.qdd = VecX::Zero(model.dof());
    const VecX init = options.warm_start ? warm : model.neutral();
    try {
      auto res = inverse_kinematics_frame(model, partition, frame, init, options.frame);
      state.q = res.q;
      sol.residual[k] = res.residual;
      sol.constraint_norm[k] = res.constraint_norm;
      sol.iterations[k] = res.iterations;
      ok[k] = true;
      warm = res.q;
    } catch (const Error& e) {
      if (options.policy == FailurePolicy::Abort) throw FrameError(k, e.what());
      spdlog::warn("IK frame {} failed and will be interpolated: {}", k, e.what());
    }
  }

  if (options.policy == FailurePolicy::SkipAndInterpolate) {
    std::vector<size_t> good;
    for (size_t k = 0; k < n; ++k) {
      if (ok[k]) good.push_back(k);
    }
    if (good.empty()) throw FrameError(0, "IK failed on every frame");
    for (size_t k = 0; k < n; ++k) {
      if (ok[k]) continue;
      auto after = std::lower_bound(good.begin(), good.end(), k);
      VecX q;
      if (after == good.begin()) {
        q = sol.states[*after].q;
      } else if (after == good.end()) {
        q = sol.states[good.back()].q;
      } else {
        const size_t lo = *(after - 1);
        const size_t hi = *after;
        const double w = static_cast<double>(k - lo) / static_cast<double>(hi - lo);
        q = (1.0 - w) * sol.states[lo].q + w * sol.states[hi].q;
      }
      try {
        q = solve_closure(model, q, partition, options.frame.closure).q;
      } catch (const SolverError& e) {
        throw FrameError(k, std::string("interpolated frame could not be closed: ") + e.what());
      }
      sol.states[k].q = q;
      sol.residual[k] = std::nan("");
      try {
        const auto present = select_markers(model, trajectory.frames[k]);
        sol.residual[k] = residual_vector(model, present, q).squaredNorm();
      } catch (const DomainError&) {
      }
      sol.constraint_norm[k] =
          model.n_constraints() > 0 ? loop_constraints(model, q).lpNorm<Eigen::Infinity>() : 0.0;
      sol.interpolated_frames.push_back(k);
    }
  }
  return sol;
}

}  // namespace exobench
