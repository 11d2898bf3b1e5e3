#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>

using namespace exobench;
using nlohmann::json;

namespace {

json default_doc() { return json::parse(default_model_text()); }

bool has_code(const ValidationReport& report, const std::string& code) {
  return std::any_of(report.begin(), report.end(), [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("default model loads with the expected structure") {
  const auto chain = default_model();
  CHECK(chain.segments.size() == 7);
  CHECK(chain.n_coords == 23);
  CHECK(chain.loop_cuts.size() == 1);
  CHECK(validate_chain(chain).empty());
}

TEST_CASE("bundled data file and embedded text agree") {
  CHECK(load_model_file(test::data_path("default_model.json")) == default_model());
}

TEST_CASE("duplicate coordinate index is rejected") {
  auto doc = default_doc();
  doc["joints"][1]["dofs"][0]["q"] = 5;
  CHECK_THROWS_AS(load_model(doc.dump()), ModelError);
  CHECK(has_code(validate_chain(parse_model(doc.dump())), "duplicate_coord"));
}

TEST_CASE("negative mass is a validation error") {
  auto doc = default_doc();
  doc["segments"][3]["mass"] = -1.0;
  CHECK_THROWS_AS(load_model(doc.dump()), ModelError);
  CHECK(has_code(validate_chain(parse_model(doc.dump())), "negative_mass"));
}

TEST_CASE("unknown axis and malformed JSON are parse errors") {
  auto doc = default_doc();
  doc["joints"][0]["dofs"][0]["axis"] = "W";
  CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
  CHECK_THROWS_AS(parse_model("{ not json"), ParseError);
}

TEST_CASE("missing segment reference is reported") {
  auto doc = default_doc();
  doc["joints"][2]["child"] = "nowhere";
  CHECK_THROWS_AS(load_model(doc.dump()), Error);
}

TEST_CASE("22 coordinates gives an n_coords mismatch") {
  auto chain = default_model();
  chain.n_coords = 22;
  CHECK(has_code(validate_chain(chain), "n_coords_mismatch"));
}

TEST_CASE("inertia violating the triangle inequality is reported") {
  auto chain = default_model();
  chain.segments[4].inertia = Vec3(0.001, 0.001, 0.005).asDiagonal();
  const auto report = validate_chain(chain);
  CHECK(has_code(report, "inertia_triangle"));
  const auto it = std::find_if(report.begin(), report.end(), [](const Violation& v) { return v.code == "inertia_triangle"; });
  REQUIRE(it != report.end());
  CHECK(it->location.find("ulna") != std::string::npos);
}

TEST_CASE("coordinate names map to numbers") {
  const auto chain = default_model();
  CHECK(coordinate_index(chain, "RU.pronation_supination") == 19);
  CHECK(coordinate_index(chain, "HU.flexion_extension") == 16);
  CHECK_THROWS_AS(coordinate_index(chain, "nonexistent"), Error);
  for (int c = 1; c <= 23; ++c) CHECK(coordinate_index(chain, coordinate_name(chain, c)) == c);
}

TEST_CASE("coordinate numbers cover 1..23 exactly once") {
  const auto chain = default_model();
  std::vector<int> seen;
  for (const auto& j : chain.joints)
    for (const auto& d : j.dofs) seen.push_back(d.coord);
  std::sort(seen.begin(), seen.end());
  REQUIRE(seen.size() == 23);
  for (int i = 0; i < 23; ++i) CHECK(seen[i] == i + 1);
}

TEST_CASE("serialize then parse round trips") {
  const auto chain = default_model();
  CHECK(parse_model(serialize_model(chain)) == chain);
  auto modified = chain;
  modified.segments[5].mass = 0.123456789012345;
  modified.markers[0].local_position.x() += 1e-7;
  CHECK(parse_model(serialize_model(modified)) == modified);
}
