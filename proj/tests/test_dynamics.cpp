#include "exobench/dynamics.hpp"
#include "support.hpp"

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>

using namespace exobench;

namespace {

constexpr double kPi = std::numbers::pi;

const Multibody& model() {
  static const Multibody m(default_model());
  return m;
}

const CoordinatePartition& partition() {
  static const CoordinatePartition p = choose_partition(model());
  return p;
}

// Default chain with the three shoulder-girdle segments given real mass, so
// that M is well conditioned enough for tight Euclidean round trips.
const Multibody& heavy_model() {
  static const Multibody m = [] {
    auto chain = default_model();
    for (int i = 0; i < 3; ++i) {
      chain.segments[i].mass = 1.0;
      chain.segments[i].inertia = Mat3::Identity() * 1e-2;
    }
    return Multibody(chain);
  }();
  return m;
}

GeneralizedState random_state(const Multibody& m, const CoordinatePartition& p, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  GeneralizedState s;
  s.q = test::random_closed_q(m, p, rng);
  VecX qd(m.dof()), qdd(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    qd[i] = g(rng);
    qdd[i] = g(rng);
  }
  s.qd = project_velocity(m, p, s.q, qd);
  s.qdd = project_acceleration(m, p, s.q, s.qd, qdd);
  return s;
}

VecX v1(double x) { return VecX::Constant(1, x); }

}  // namespace

TEST_CASE("pendulum mass matrix, gravity torque and free fall") {
  const test::PendulumParams p;
  const Multibody pend(test::pendulum_chain(p));
  const double I = p.izz + p.mass * p.length * p.length;
  const double mgl = p.mass * 9.81 * p.length;
  for (double th : {-2.0, -0.4, 0.0, 0.7, 1.9}) {
    CHECK(std::abs(mass_matrix(pend, v1(th))(0, 0) - I) <= 1e-10);
    CHECK(std::abs(nonlinear_effects(pend, v1(th), v1(0.0))[0] - mgl * std::sin(th)) <= 1e-10);
  }
  const auto fd = forward_dynamics(pend, v1(kPi / 2), v1(0.0), v1(0.0));
  CHECK(std::abs(fd.qdd[0] - (-mgl / I)) <= 1e-10);
}

TEST_CASE("pendulum inverse dynamics along an analytic motion") {
  const test::PendulumParams p;
  const Multibody pend(test::pendulum_chain(p));
  const auto part = choose_partition(pend);
  const double I = p.izz + p.mass * p.length * p.length;
  const double A = 0.8, w = 2.3;
  for (double t = 0.0; t < 3.0; t += 0.1) {
    GeneralizedState s;
    s.q = v1(A * std::sin(w * t));
    s.qd = v1(A * w * std::cos(w * t));
    s.qdd = v1(-A * w * w * std::sin(w * t));
    const auto r = inverse_dynamics(pend, part, s);
    const double expect = I * s.qdd[0] + p.mass * 9.81 * p.length * std::sin(s.q[0]);
    CHECK(std::abs(r.Q[0] - expect) <= 1e-8);
  }
}

TEST_CASE("pendulum energy drift under semi-implicit Euler") {
  const test::PendulumParams p;
  const Multibody pend(test::pendulum_chain(p));
  const auto zero = [](double, const VecX&, const VecX&) { return VecX::Zero(1); };
  const double dt = 1e-4;
  const auto states = simulate(pend, v1(2.0 * kPi / 3.0), v1(0.0), zero, dt, 100000);
  const double E0 = kinetic_energy(pend, states.front().q, states.front().qd) + potential_energy(pend, states.front().q);
  double worst = 0.0;
  for (const auto& s : states) worst = std::max(worst, std::abs(kinetic_energy(pend, s.q, s.qd) + potential_energy(pend, s.q) - E0));
  const double seconds = dt * (states.size() - 1);
  CHECK(seconds == doctest::Approx(10.0));
  CHECK(worst / std::abs(E0) < 1e-3);
  CHECK(worst / std::abs(E0) / seconds < 1e-3);
}

TEST_CASE("mass matrix is symmetric and positive definite") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const VecX q = test::random_closed_q(model(), partition(), rng, 1.0);
    const MatX M = mass_matrix(model(), q);
    CHECK((M - M.transpose()).lpNorm<Eigen::Infinity>() <= 1e-10);
    if (i % 10 == 0) {
      Eigen::SelfAdjointEigenSolver<MatX> es(M);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("nonlinear effects") {
  auto chain = default_model();
  chain.gravity = Vec3::Zero();
  const Multibody weightless(chain);
  std::mt19937_64 rng(11);
  const VecX q = test::random_closed_q(model(), partition(), rng);
  CHECK(nonlinear_effects(weightless, q, VecX::Zero(23)).norm() == 0.0);

  auto doubled = default_model();
  for (auto& s : doubled.segments) {
    s.mass *= 2.0;
    s.inertia *= 2.0;
  }
  const Multibody twice(doubled);
  std::normal_distribution<double> g(0.0, 1.0);
  VecX qd(23);
  for (int i = 0; i < 23; ++i) qd[i] = g(rng);
  const VecX c1 = nonlinear_effects(model(), q, qd);
  const VecX c2 = nonlinear_effects(twice, q, qd);
  CHECK((c2 - 2.0 * c1).norm() <= 1e-14 * c1.norm());
}

TEST_CASE("inverse dynamics of a motionless weightless chain is zero") {
  auto chain = default_model();
  chain.gravity = Vec3::Zero();
  const Multibody weightless(chain);
  GeneralizedState s;
  s.q = model().neutral();
  s.qd = VecX::Zero(23);
  s.qdd = VecX::Zero(23);
  const auto r = inverse_dynamics(weightless, partition(), s);
  CHECK(r.Q.norm() == 0.0);
  CHECK(r.lambda.norm() == 0.0);
}

TEST_CASE("inverse dynamics is linear in the external loads") {
  std::mt19937_64 rng(12);
  const auto s = random_state(model(), partition(), rng);
  ExternalLoads a, b, ab;
  a.per_segment.assign(7, {});
  b.per_segment.assign(7, {});
  a.per_segment[6].force = Vec3(1.0, 2.0, -0.5);
  b.per_segment[5].torque = Vec3(0.1, -0.3, 0.2);
  ab.per_segment = a.per_segment;
  ab.per_segment[5].torque = b.per_segment[5].torque;
  const auto r0 = inverse_dynamics(model(), partition(), s);
  const auto ra = inverse_dynamics(model(), partition(), s, a);
  const auto rb = inverse_dynamics(model(), partition(), s, b);
  const auto rab = inverse_dynamics(model(), partition(), s, ab);
  CHECK((rab.Q - (ra.Q + rb.Q - r0.Q)).norm() <= 1e-10 * (1.0 + r0.Q.norm()));
}

TEST_CASE("inverse dynamics rejects inconsistent states") {
  std::mt19937_64 rng(13);
  auto s = random_state(model(), partition(), rng);
  s.q[partition().dependent[0]] += 1e-3;
  CHECK_THROWS_AS(inverse_dynamics(model(), partition(), s), DomainError);
}

TEST_CASE("dependent rows of Q are zero") {
  std::mt19937_64 rng(14);
  const auto s = random_state(model(), partition(), rng);
  const auto r = inverse_dynamics(model(), partition(), s);
  for (int d : partition().dependent) CHECK(r.Q[d] == 0.0);
}

TEST_CASE("forward dynamics inverts inverse dynamics") {
  const auto heavy_part = choose_partition(heavy_model());
  std::mt19937_64 rng(15);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(heavy_model(), heavy_part, rng);
    const auto id = inverse_dynamics(heavy_model(), heavy_part, s);
    const auto fd = forward_dynamics(heavy_model(), s.q, s.qd, id.Q);
    worst = std::max(worst, (fd.qdd - s.qdd).norm() / s.qdd.norm());
    CHECK((fd.lambda - id.lambda).norm() <= 1e-6 * (1.0 + id.lambda.norm()));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("forward dynamics inverts inverse dynamics in the kinetic-energy norm on the default chain") {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(model(), partition(), rng);
    const auto id = inverse_dynamics(model(), partition(), s);
    const auto fd = forward_dynamics(model(), s.q, s.qd, id.Q);
    const MatX M = mass_matrix(model(), s.q);
    const VecX e = fd.qdd - s.qdd;
    CHECK(std::sqrt(e.dot(M * e)) <= 1e-8 * std::sqrt(s.qdd.dot(M * s.qdd)));
  }
}

TEST_CASE("gravity-compensating torques hold the chain still") {
  const test::PendulumParams p;
  const Multibody pend(test::pendulum_chain(p));
  const auto pp = choose_partition(pend);
  GeneralizedState s{0.0, v1(0.9), v1(0.0), v1(0.0)};
  CHECK(std::abs(forward_dynamics(pend, s.q, s.qd, inverse_dynamics(pend, pp, s).Q).qdd[0]) <= 1e-8);

  const auto heavy_part = choose_partition(heavy_model());
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    GeneralizedState st;
    st.q = test::random_closed_q(heavy_model(), heavy_part, rng);
    st.qd = VecX::Zero(23);
    st.qdd = VecX::Zero(23);
    const auto id = inverse_dynamics(heavy_model(), heavy_part, st);
    const auto fd = forward_dynamics(heavy_model(), st.q, st.qd, id.Q);
    // force-level residual, M qdd, against the size of the applied torques
    CHECK((mass_matrix(heavy_model(), st.q) * fd.qdd).norm() <= 1e-8 * id.Q.norm());
  }
}

TEST_CASE("power and energy") {
  JointTorqueSeries tq;
  std::vector<VecX> qd;
  for (int k = 0; k < 4; ++k) {
    tq.t.push_back(0.1 * k);
    VecX Q = VecX::Zero(23);
    Q[18] = 0.2;
    tq.Q.push_back(Q);
    tq.lambda.push_back(VecX::Zero(3));
    qd.push_back(VecX::Zero(23));
  }
  auto P = joint_power(tq, qd);
  for (double x : P.total) CHECK(x == 0.0);
  CHECK(energy(P) == 0.0);
  for (auto& v : qd) v[18] = 1.0;
  P = joint_power(tq, qd);
  for (size_t k = 0; k < P.total.size(); ++k) {
    CHECK(P.per_coord[k][18] == doctest::Approx(0.2));
    CHECK(P.total[k] == doctest::Approx(0.2));
  }

  PowerSeries c;
  for (int k = 0; k <= 300; ++k) {
    c.t.push_back(0.01 * k);
    c.total.push_back(2.0);
    c.per_coord.push_back(VecX::Constant(1, 2.0));
  }
  CHECK(energy(c) == doctest::Approx(6.0).epsilon(1e-12));

  PowerSeries s;
  const int n = 20000;
  for (int k = 0; k <= n; ++k) {
    const double t = 2.0 * kPi * k / n;
    s.t.push_back(t);
    s.total.push_back(std::sin(t));
    s.per_coord.push_back(VecX::Constant(1, std::sin(t)));
  }
  CHECK(std::abs(energy(s) - 4.0) <= 1e-4);
  CHECK(std::abs(net_work(s)) <= 1e-9);
}

TEST_CASE("work done by applied torques matches the change in energy") {
  // weightless, otherwise the floating base free-falls and swamps the work
  auto chain = heavy_model().chain();
  chain.gravity = Vec3::Zero();
  const Multibody m(chain);
  std::mt19937_64 rng(18);
  const VecX q0 = test::random_closed_q(m, choose_partition(m), rng, 0.2);
  const VecX qd0 = VecX::Zero(23);
  const auto law = [](double t, const VecX&, const VecX&) {
    VecX Q = VecX::Zero(23);
    Q[18] = 0.05 * std::sin(3.0 * t);
    Q[15] = 0.2 * std::cos(2.0 * t);
    return Q;
  };
  const double dt = 1e-4;
  const auto states = simulate(m, q0, qd0, law, dt, 10000);
  double work = 0.0;
  for (size_t k = 0; k + 1 < states.size(); ++k) {
    const VecX qd_mid = 0.5 * (states[k].qd + states[k + 1].qd);
    work += law(states[k].t, states[k].q, states[k].qd).dot(qd_mid) * dt;
  }
  auto E = [&](const GeneralizedState& s) { return kinetic_energy(m, s.q, s.qd) + potential_energy(m, s.q); };
  const double dE = E(states.back()) - E(states.front());
  CHECK(std::abs(dE - work) <= 0.02 * std::abs(work) + 1e-4);
}
