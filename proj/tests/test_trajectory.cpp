#include "exobench/trajectory.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

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

}  // namespace

TEST_CASE("finite differences of a linear series are exact") {
  std::vector<double> v;
  for (int k = 0; k < 20; ++k) v.push_back(0.3 + 1.7 * 0.01 * k);
  const auto d = finite_difference(v, 0.01);
  for (size_t k = 1; k + 1 < v.size(); ++k) {
    CHECK(std::abs(d.rate[k] - 1.7) <= 1e-12);
    CHECK(std::abs(d.accel[k]) <= 1e-9);
  }
  CHECK_THROWS_AS(finite_difference({1.0, 2.0}, 0.01), DomainError);
}

TEST_CASE("differentiate on an unconstrained sinusoid is second order") {
  const double A = 0.4, w = 3.0;
  auto worst_error = [&](double dt) {
    IkSolution sol;
    for (int k = 0; k * dt <= 2.0; ++k) {
      GeneralizedState s;
      s.t = k * dt;
      s.q = model().neutral();
      s.q[21] = A * std::sin(w * s.t);  // wrist, outside the loop
      sol.states.push_back(s);
    }
    const auto d = differentiate(model(), partition(), sol, 1.0 / dt);
    double e = 0.0;
    for (size_t k = 1; k + 1 < sol.states.size(); ++k) {
      const double t = sol.states[k].t;
      e = std::max(e, std::abs(d.states[k].qd[21] - A * w * std::cos(w * t)));
      e = std::max(e, std::abs(d.states[k].qdd[21] + A * w * w * std::sin(w * t)));
    }
    return e;
  };
  const double e1 = worst_error(0.01), e2 = worst_error(0.005);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("differentiate rejects two frames") {
  IkSolution sol;
  for (int k = 0; k < 2; ++k) sol.states.push_back({0.01 * k, model().neutral(), {}, {}});
  CHECK_THROWS_AS(differentiate(model(), partition(), sol, 100.0), DomainError);
}

TEST_CASE("moving average") {
  const std::vector<double> v{1, 2, 3, 10, 5};
  CHECK(moving_average(v, 1) == v);
  const auto m = moving_average(v, 3);
  CHECK(m[2] == doctest::Approx(5.0));
  CHECK_THROWS(moving_average(v, 2));
}

TEST_CASE("default sweep spans the published amplitudes at the stated speed") {
  const auto syn = synth_ps_trajectory(model(), partition(), PsSweepSpec{});
  double lo = 1e9, hi = -1e9, peak_rate = 0.0;
  for (const auto& s : syn.truth) {
    lo = std::min(lo, s.q[18]);
    hi = std::max(hi, s.q[18]);
    peak_rate = std::max(peak_rate, std::abs(s.qd[18]));
  }
  const double deg = 180.0 / std::numbers::pi;
  CHECK((hi - lo) * deg == doctest::Approx(156.31).epsilon(1e-9));
  CHECK(peak_rate * deg == doctest::Approx(66.6).epsilon(1e-9));
  CHECK(syn.markers.sample_rate == 100.0);
  for (const auto& s : syn.truth) CHECK(loop_constraints(model(), s.q).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("noise-free synthetic markers lie on the FK surface") {
  PsSweepSpec spec;
  spec.duration_s = 0.5;
  const auto syn = synth_ps_trajectory(model(), partition(), spec);
  for (size_t k = 0; k < syn.truth.size(); ++k) {
    const auto fk = forward_kinematics(model(), syn.truth[k].q);
    for (const auto& [name, p] : syn.markers.frames[k].positions) CHECK((p - fk.markers.at(name)).norm() == 0.0);
  }
}

TEST_CASE("synthesis is deterministic for a seed") {
  PsSweepSpec spec;
  spec.duration_s = 0.3;
  spec.noise_sd_m = 1e-3;
  const auto a = synth_ps_trajectory(model(), partition(), spec);
  const auto b = synth_ps_trajectory(model(), partition(), spec);
  spec.seed = 43;
  const auto c = synth_ps_trajectory(model(), partition(), spec);
  CHECK(a.markers.frames[3].positions == b.markers.frames[3].positions);
  CHECK(a.markers.frames[3].positions != c.markers.frames[3].positions);
}

TEST_CASE("sweep profile is continuous") {
  const SweepProfile p(-1.0, 1.2, 1.16, 0.2, 0.25);
  for (double t = 0.0; t < 2.0 * p.period(); t += 1e-3) {
    CHECK(std::abs(p.position(t + 1e-6) - p.position(t)) < 2e-6);
    CHECK(std::abs(p.rate(t)) <= 1.16 + 1e-12);
  }
}
