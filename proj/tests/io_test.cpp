#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lattice_reach/io.hpp"
#include "support/generators.hpp"

namespace lattice_reach {
namespace {

using test::vec;

TEST(LatticeJson, RoundTrip) {
  std::mt19937_64 rng(12);
  const FaceLattice l = test::random_polytope(rng, 3, 3);
  const auto j = lattice_to_json(l);
  EXPECT_EQ(j.at("ambient_dim"), 3);
  EXPECT_EQ(j.at("faces").size(), 3u);
  EXPECT_EQ(j.at("vertices").size(), l.vertex_count());
  const FaceLattice back = lattice_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back == l);
}

TEST(LatticeJson, RejectsMalformed) {
  EXPECT_THROW(lattice_from_json(nlohmann::json::parse(R"({"ambient_dim": 2})")), ParseError);
  EXPECT_THROW(lattice_from_json(nlohmann::json::parse(
                   R"({"ambient_dim": 2, "vertices": [[0, 0, 0]], "faces": []})")),
               DimensionError);
}

TEST(Lineage, OneSignStringPerLayer) {
  const Lineage l{{0, 0, true}, {0, 1, false}, {2, 0, false}};
  EXPECT_EQ(lineage_to_json(l).dump(), R"([{"layer":0,"signs":"+-"},{"layer":2,"signs":"-"}])");
}

TEST(ReachJson, FieldsAndVertexImages) {
  const Network net = test::identity_relu_network(2);
  const auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  const auto j = reach_result_to_json(r);
  ASSERT_EQ(j.at("regions").size(), 4u);
  EXPECT_EQ(j.at("stats").at("region_count"), 4);
  EXPECT_FALSE(j.at("stats").contains("wall_time_seconds"));
  for (const auto& reg : j.at("regions")) {
    for (const char* key : {"lineage", "input_vertices", "M", "d", "output_vertices"}) EXPECT_TRUE(reg.contains(key));
    EXPECT_EQ(reg.at("input_vertices").size(), reg.at("output_vertices").size());
  }
  // The all-inactive quadrant maps everything to the origin.
  for (const auto& y : j.at("regions")[3].at("output_vertices")) EXPECT_EQ(y, nlohmann::json({0.0, 0.0}));
}

TEST(VertexCsv, SelectedColumns) {
  const Network net = test::identity_relu_network(2);
  const auto r = reach(net, box_lattice(vec({1, 1}), vec({2, 3})));
  std::ostringstream out;
  write_vertex_csv(out, r, {1});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "region,vertex,y1");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4u);
  std::ostringstream bad;
  EXPECT_THROW(write_vertex_csv(bad, r, {5}), DimensionError);
}

TEST(VerdictJson, Fields) {
  Verdict v;
  auto j = verdict_to_json(v, std::nullopt, std::nullopt);
  EXPECT_EQ(j.at("status"), "UNSAT");
  EXPECT_TRUE(j.at("witness").is_null());
  v.status = Verdict::Status::Sat;
  v.unsafe_regions.push_back(box_lattice(vec({0}), vec({1})));
  j = verdict_to_json(v, vec({0.5}), std::string("regions.json"));
  EXPECT_EQ(j.at("status"), "SAT");
  EXPECT_EQ(j.at("unsafe_region_count"), 1);
  EXPECT_EQ(j.at("witness"), nlohmann::json({0.5}));
  EXPECT_EQ(j.at("unsafe_regions_file"), "regions.json");
}

}  // namespace
}  // namespace lattice_reach
