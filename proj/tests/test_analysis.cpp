#include "exobench/analysis.hpp"
#include "exobench/report.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace exobench;

namespace {

std::vector<double> column(const ResultSet& set, double RangeStats::*field, bool angle) {
  std::vector<double> v;
  for (const auto& r : set.rows) v.push_back((angle ? r.angle : r.torque).*field);
  return v;
}

std::vector<double> random_series(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("range statistics") {
  const auto r = range_stats({-12.0, -54.27, 3.0, 78.79, 10.0}, "deg");
  CHECK(r.min == -54.27);
  CHECK(r.max == 78.79);
  CHECK(r.range == doctest::Approx(133.06).epsilon(1e-12));
  CHECK(r.units == "deg");
  CHECK(range_stats({4.2, 4.2, 4.2}).range == 0.0);
  CHECK_THROWS_AS(range_stats({}), DomainError);
  CHECK_THROWS_AS(range_stats({1.0, NAN}), DomainError);

  const double A = 1.7;
  std::vector<double> s;
  for (int i = 0; i <= 100000; ++i) s.push_back(A * std::sin(2.0 * std::numbers::pi * i / 100000.0));
  CHECK(range_stats(s).range == doctest::Approx(2.0 * A).epsilon(1e-8));
}

TEST_CASE("aggregate on the transcribed simulation table") {
  const auto set = load_result_set(test::data_path("fixtures/table2"));
  REQUIRE(set.rows.size() == 15);
  const auto angle = aggregate(column(set, &RangeStats::range, true));
  CHECK(std::abs(angle.mean - 146.84) <= 0.01);
  CHECK(std::abs(angle.sd - 14.32) <= 0.01);
  const auto torque = aggregate(column(set, &RangeStats::range, false));
  CHECK(std::abs(torque.mean - 0.197) <= 0.01);
  CHECK(std::abs(torque.sd - 0.05) <= 0.01);
  CHECK(angle.n == 15);
}

TEST_CASE("aggregate edge cases") {
  const auto a = aggregate({3.0, 3.0, 3.0});
  CHECK(a.mean == 3.0);
  CHECK(a.sd == 0.0);
  CHECK_THROWS_AS(aggregate({1.0}), DomainError);
  // n - 1 denominator
  CHECK(aggregate({1.0, 3.0}).sd == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("aggregate is permutation invariant and affine equivariant") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto v = random_series(rng, 2 + trial % 20);
    const auto base = aggregate(v);
    std::shuffle(v.begin(), v.end(), rng);
    const auto shuffled = aggregate(v);
    CHECK(shuffled.mean == doctest::Approx(base.mean).epsilon(1e-12));
    CHECK(shuffled.sd == doctest::Approx(base.sd).epsilon(1e-12));
    const double a = -2.5, b = 7.0;
    for (auto& x : v) x = a * x + b;
    const auto t = aggregate(v);
    CHECK(t.mean == doctest::Approx(a * base.mean + b).epsilon(1e-12));
    CHECK(t.sd == doctest::Approx(std::abs(a) * base.sd).epsilon(1e-12));
  }
}

TEST_CASE("reliability bands") {
  CHECK(reliability_band(0.93) == ReliabilityBand::Excellent);
  CHECK(reliability_band(0.84) == ReliabilityBand::Good);
  CHECK(reliability_band(0.81) == ReliabilityBand::Good);
  CHECK(reliability_band(0.90) == ReliabilityBand::Excellent);
  CHECK(reliability_band(0.80) == ReliabilityBand::Good);
  CHECK(reliability_band(0.75) == ReliabilityBand::Acceptable);
  CHECK(reliability_band(0.65) == ReliabilityBand::Moderate);
  CHECK(reliability_band(0.2) == ReliabilityBand::Fair);
  CHECK(reliability_band(-3.0) == ReliabilityBand::Fair);
  CHECK(reliability_band(1.0) == ReliabilityBand::Excellent);
  CHECK_THROWS_AS(reliability_band(NAN), DomainError);
  // total and monotone over the real line
  int last = 0;
  for (double x = -1.0; x <= 1.0; x += 0.001) {
    const int b = static_cast<int>(reliability_band(x));
    CHECK(b >= last);
    last = b;
  }
  CHECK(band_name(ReliabilityBand::Good) == "good");
}

TEST_CASE("alpha of identical trials is one") {
  const std::vector<double> a{0.10, 0.14, 0.12, 0.19, 0.11};
  const auto r = reliability_alpha(a, a, {"t1", "t2"});
  CHECK(r.alpha == 1.0);
  CHECK(r.band == ReliabilityBand::Excellent);
  CHECK(r.trial_pair.first == "t1");
}

TEST_CASE("alpha errors") {
  CHECK_THROWS_AS(reliability_alpha({1, 2, 3}, {1, 2}), DomainError);
  CHECK_THROWS_AS(reliability_alpha({1, 2}, {1, 2}), DomainError);
  CHECK_THROWS_AS(reliability_alpha({1, 1, 1}, {2, 2, 2}), DomainError);
}

TEST_CASE("alpha is symmetric and invariant under a shared affine map") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_series(rng, 8);
    std::vector<double> b = a;
    for (auto& x : b) x += g(rng);
    const double base = reliability_alpha(a, b).alpha;
    CHECK(reliability_alpha(b, a).alpha == doctest::Approx(base).epsilon(1e-12));
    const double s = 0.01 + 3.0 * trial, c = -40.0 + trial;
    auto a2 = a, b2 = b;
    for (auto& x : a2) x = s * x + c;
    for (auto& x : b2) x = s * x + c;
    CHECK(std::abs(reliability_alpha(a2, b2).alpha - base) <= 1e-12);
  }
}

TEST_CASE("alpha decreases in expectation as independent noise grows") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  double previous = 2.0;
  for (double sd : {0.1, 0.3, 0.6, 1.0, 2.0}) {
    double sum = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      auto a = random_series(rng, 15);
      auto b = a;
      for (auto& x : b) x += sd * g(rng);
      sum += reliability_alpha(a, b).alpha;
    }
    const double mean = sum / 1000.0;
    CHECK(mean < previous);
    previous = mean;
  }
}

TEST_CASE("percent difference") {
  CHECK(percent_difference(0.20, 0.28) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(percent_difference(0.29, 0.28) == doctest::Approx(3.448275862).epsilon(1e-9));
  CHECK(round_to(percent_difference(0.29, 0.28), 1) == doctest::Approx(3.4));
  CHECK(percent_difference(1.5, 1.5) == 0.0);
  CHECK(percent_difference(-2.0, -1.0) == doctest::Approx(50.0));
  CHECK_THROWS_AS(percent_difference(0.0, 1.0), DomainError);
}

TEST_CASE("interval overlap") {
  const auto sim = UncertaintyInterval::from_mean_sd(146.84, 14.32);
  const auto exp = UncertaintyInterval::from_mean_sd(156.26, 4.71);
  CHECK(round_to(sim.lo, 2) == doctest::Approx(132.52));
  CHECK(round_to(sim.hi, 2) == doctest::Approx(161.16));
  const auto o = interval_overlap(sim, exp);
  REQUIRE(o);
  CHECK(round_to(o->lo, 2) == 151.55);
  CHECK(round_to(o->hi, 2) == 160.97);
  CHECK_FALSE(interval_overlap({0, 1}, {2, 3}));
  CHECK(*interval_overlap({0, 10}, {2, 3}) == UncertaintyInterval{2, 3});
  CHECK(*interval_overlap({0, 1}, {1, 2}) == UncertaintyInterval{1, 1});

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    double a0 = u(rng), a1 = u(rng), b0 = u(rng), b1 = u(rng);
    const UncertaintyInterval a{std::min(a0, a1), std::max(a0, a1)};
    const UncertaintyInterval b{std::min(b0, b1), std::max(b0, b1)};
    CHECK(interval_overlap(a, b) == interval_overlap(b, a));
  }
}

TEST_CASE("rounding is half away from zero") {
  CHECK(round_to(0.125, 2) == doctest::Approx(0.13));
  CHECK(round_to(-0.125, 2) == doctest::Approx(-0.13));
  CHECK(round_to(146.8466, 2) == doctest::Approx(146.85));
}
