#include "exobench/io.hpp"
#include "exobench/trajectory.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace exobench;

TEST_CASE("scalar field parsing") {
  CHECK(parse_real(" 1.5e-3 ", "x") == 1.5e-3);
  CHECK(parse_integer("42", "n") == 42);
  CHECK_THROWS_AS(parse_real("1.5x", "x"), ParseError);
  CHECK_THROWS_AS(parse_real("", "x"), ParseError);
  CHECK_THROWS_AS(parse_integer("4.2", "n"), ParseError);
  CHECK(split_csv_line("a, b ,,c") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("format_real round trips doubles") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 146.84, -71.05, 1e-300, 6.02e23}) CHECK(parse_real(format_real(v), "v") == v);
  CHECK(format_real(0.0) == "0");
}

TEST_CASE("marker CSV round trip keeps gaps") {
  const Multibody model(default_model());
  const auto part = choose_partition(model);
  PsSweepSpec spec;
  spec.duration_s = 0.05;
  auto syn = synth_ps_trajectory(model, part, spec);
  syn.markers.frames[2].positions.erase("RA3");
  const auto back = parse_marker_csv(format_marker_csv(model, syn.markers));
  REQUIRE(back.frames.size() == syn.markers.frames.size());
  CHECK(back.sample_rate == syn.markers.sample_rate);
  for (size_t k = 0; k < back.frames.size(); ++k) {
    CHECK(back.frames[k].t == syn.markers.frames[k].t);
    CHECK(back.frames[k].positions == syn.markers.frames[k].positions);
  }
}

TEST_CASE("marker CSV errors") {
  CHECK_THROWS_AS(parse_marker_csv(""), ParseError);
  CHECK_THROWS_AS(parse_marker_csv("frame,t,A_x,A_y\n0,0,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_marker_csv("frame,t,A_x,A_y,A_z\n0,0,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_marker_csv("frame,t,A_x,A_y,A_z\n0,0,1,zz,3\n"), ParseError);
}

TEST_CASE("q CSV round trip") {
  const Multibody model(default_model());
  std::vector<double> t{0.0, 0.01};
  std::vector<VecX> q{VecX::LinSpaced(23, -0.5, 0.5), VecX::LinSpaced(23, 0.1, 0.2)};
  const auto back = parse_q_csv(model, format_q_csv(model, t, q));
  CHECK(back.t == t);
  for (size_t k = 0; k < q.size(); ++k) CHECK((back.q[k] - q[k]).norm() < 1e-14);
  CHECK_THROWS_AS(parse_q_csv(model, "frame,t,q1\n0,0,1\n"), ParseError);
}

TEST_CASE("file helpers report I/O failures") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file.csv"), IoError);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/file.csv", "x"), IoError);
}
