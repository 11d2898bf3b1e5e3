#include "exobench/ik.hpp"
#include "exobench/kinematics.hpp"
#include "exobench/trajectory.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace exobench;

namespace {

const Multibody& model() {
  static const Multibody m(default_model());
  return m;
}

const CoordinatePartition& partition() {
  static const CoordinatePartition p = choose_partition(model());
  return p;
}

MarkerFrame frame_at(const VecX& q, double t = 0.0) {
  MarkerFrame f;
  f.t = t;
  f.positions = forward_kinematics(model(), q).markers;
  return f;
}

double max_independent_error(const VecX& a, const VecX& b) {
  double e = 0.0;
  for (int s : partition().independent) e = std::max(e, std::abs(a[s] - b[s]));
  return e;
}

}  // namespace

TEST_CASE("noise-free frame is recovered from the neutral guess") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    VecX truth = test::random_closed_q(model(), partition(), rng, 0.4);
    truth[13] = 0.3 + 0.1 * trial;  // keep the GH gimbal away from its singular pose
    truth = solve_closure(model(), truth, partition()).q;
    const auto r = inverse_kinematics_frame(model(), partition(), frame_at(truth), model().neutral());
    CHECK(max_independent_error(r.q, truth) < 1e-6);
    CHECK(r.constraint_norm <= 1e-8);
    CHECK(r.markers_used == 29);
  }
}

TEST_CASE("starting at the answer needs at most one iteration") {
  std::mt19937_64 rng(22);
  const VecX truth = test::random_closed_q(model(), partition(), rng);
  const auto r = inverse_kinematics_frame(model(), partition(), frame_at(truth), truth);
  CHECK(r.residual <= 1e-16);
  CHECK(r.iterations <= 1);
}

TEST_CASE("accepted iterates never increase the residual") {
  std::mt19937_64 rng(23);
  const VecX truth = test::random_closed_q(model(), partition(), rng);
  IkOptions opts;
  opts.record_history = true;
  const auto r = inverse_kinematics_frame(model(), partition(), frame_at(truth), model().neutral(), opts);
  REQUIRE(r.history.size() >= 2);
  // history holds the marker cost; the proximal term can trade at most w |dq|^2
  for (size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] + 1e-9);
}

TEST_CASE("1 mm marker noise keeps the PS angle within half a degree on average") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> noise(0.0, 1e-3);
  VecX truth = model().neutral();
  truth[18] = 0.6;
  truth[15] = 0.5;
  truth[13] = 0.4;
  truth = solve_closure(model(), truth, partition()).q;
  const auto clean = frame_at(truth);
  double sum = 0.0;
  const int trials = 20;
  for (int k = 0; k < trials; ++k) {
    MarkerFrame f = clean;
    for (auto& [name, p] : f.positions) p += Vec3(noise(rng), noise(rng), noise(rng));
    const auto r = inverse_kinematics_frame(model(), partition(), f, truth);
    sum += std::abs(r.q[18] - truth[18]);
  }
  CHECK(sum / trials * 180.0 / std::numbers::pi < 0.5);
}

TEST_CASE("missing markers are left out of the fit") {
  std::mt19937_64 rng(25);
  const VecX truth = test::random_closed_q(model(), partition(), rng);
  auto f = frame_at(truth);
  f.positions.erase("TH1");
  f.positions.erase("HD3");
  const auto r = inverse_kinematics_frame(model(), partition(), f, truth);
  CHECK(r.markers_used == 27);
  CHECK(max_independent_error(r.q, truth) < 1e-6);
}

TEST_CASE("trajectory IK") {
  std::mt19937_64 rng(26);
  const VecX truth = test::random_closed_q(model(), partition(), rng);
  MarkerTrajectory one;
  one.frames.push_back(frame_at(truth));
  const auto single = inverse_kinematics_trajectory(model(), partition(), one);
  const auto direct = inverse_kinematics_frame(model(), partition(), one.frames[0], model().neutral());
  REQUIRE(single.states.size() == 1);
  CHECK(single.states[0].q == direct.q);

  MarkerTrajectory constant;
  for (int k = 0; k < 5; ++k) constant.frames.push_back(frame_at(truth, 0.01 * k));
  const auto sol = inverse_kinematics_trajectory(model(), partition(), constant);
  for (size_t k = 1; k < sol.states.size(); ++k) CHECK((sol.states[k].q - sol.states[0].q).norm() < 1e-9);
}

TEST_CASE("synthetic sweep round trip") {
  PsSweepSpec spec;
  spec.duration_s = 1.0;
  const auto syn = synth_ps_trajectory(model(), partition(), spec);
  REQUIRE(syn.markers.frames.size() == 101);
  const auto sol = inverse_kinematics_trajectory(model(), partition(), syn.markers);
  double ps = 0.0, ind = 0.0, h = 0.0;
  for (size_t k = 0; k < sol.states.size(); ++k) {
    ps = std::max(ps, std::abs(sol.states[k].q[18] - syn.truth[k].q[18]));
    ind = std::max(ind, max_independent_error(sol.states[k].q, syn.truth[k].q));
    h = std::max(h, sol.constraint_norm[k]);
  }
  CHECK(ps < 1e-5);
  CHECK(ind < 1e-6);
  CHECK(h <= 1e-8);
}

TEST_CASE("frame failures abort or are interpolated") {
  std::mt19937_64 rng(27);
  const VecX truth = test::random_closed_q(model(), partition(), rng);
  MarkerTrajectory traj;
  for (int k = 0; k < 5; ++k) traj.frames.push_back(frame_at(truth, 0.01 * k));
  traj.frames[2].positions.clear();  // nothing to fit
  CHECK_THROWS_AS(inverse_kinematics_trajectory(model(), partition(), traj), FrameError);
  IkTrajectoryOptions opts;
  opts.policy = FailurePolicy::SkipAndInterpolate;
  const auto sol = inverse_kinematics_trajectory(model(), partition(), traj, opts);
  REQUIRE(sol.interpolated_frames.size() == 1);
  CHECK(sol.interpolated_frames[0] == 2);
  CHECK(sol.constraint_norm[2] <= 1e-8);
  CHECK(sol.missing_markers == 29);
}

TEST_CASE("marker trajectory timing is validated") {
  MarkerTrajectory t;
  t.sample_rate = 100.0;
  for (double time : {0.0, 0.01, 0.03}) t.frames.push_back({time, {}});
  CHECK_THROWS(t.validate());
}
