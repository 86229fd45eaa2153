#include <gtest/gtest.h>

#include <random>

#include "lattice_reach/oracle.hpp"
#include "support/generators.hpp"

namespace lattice_reach {
namespace {

using test::vec;

TEST(EnumerateRegions, IdentityLayerGivesQuadrants) {
  const auto regions = enumerate_regions_lp(test::identity_relu_network(2), vec({-1, -1}), vec({1, 1}));
  ASSERT_EQ(regions.size(), 4u);
  EXPECT_EQ(regions[0].pattern, (ActivationPattern{{true, true}}));
  EXPECT_EQ(regions[3].pattern, (ActivationPattern{{false, false}}));
}

TEST(EnumerateRegions, PositiveBoxGivesOnePattern) {
  const auto regions = enumerate_regions_lp(test::identity_relu_network(2), vec({1, 1}), vec({2, 2}));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].pattern, (ActivationPattern{{true, true}}));
  EXPECT_EQ(regions[0].map, Eigen::MatrixXd::Identity(2, 2));
}

TEST(EnumerateRegions, ConstantNeuronFollowsBiasSign) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 0) = 1.0;
  const Network net({{w, vec({0, -1}), Activation::ReLU},
                     {Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), Activation::Linear}});
  const auto regions = enumerate_regions_lp(net, vec({-1, -1}), vec({1, 1}));
  ASSERT_EQ(regions.size(), 2u);
  for (const auto& r : regions) EXPECT_FALSE(r.pattern[0][1]);
}

TEST(EnumerateRegions, Errors) {
  const Network net = test::identity_relu_network(2);
  EXPECT_THROW(enumerate_regions_lp(net, vec({0, 0}), vec({1, 0})), InvalidArgument);
  EXPECT_THROW(enumerate_regions_lp(net, vec({0}), vec({1})), DimensionError);
  OracleOptions opt;
  opt.region_cap = 2;
  EXPECT_THROW(enumerate_regions_lp(net, vec({-1, -1}), vec({1, 1}), opt), ResourceLimitError);
}

class OracleAgreement : public ::testing::TestWithParam<int> {};

TEST_P(OracleAgreement, MatchesEngineOnRandomNetworks) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Network net = test::random_network(rng, 2, {3, 3}, 2);
  const Eigen::VectorXd lo = vec({-1, -1}), hi = vec({1, 1});
  const auto oracle = enumerate_regions_lp(net, lo, hi);
  const auto r = reach(net, box_lattice(lo, hi));
  ASSERT_EQ(oracle.size(), r.tuples.size());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    EXPECT_EQ(oracle[k].lineage, r.tuples[k].lineage);
    EXPECT_LE((oracle[k].map - r.tuples[k].map).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((oracle[k].shift - r.tuples[k].shift).cwiseAbs().maxCoeff(), 1e-9);
    // Feasibility soundness: the interior point is strictly inside the box
    // and on the recorded side of every neuron.
    const Eigen::VectorXd& x = oracle[k].interior_point;
    EXPECT_GT(oracle[k].margin, 1e-9);
    EXPECT_TRUE(((x - lo).array() >= -1e-12).all() && ((hi - x).array() >= -1e-12).all());
    EXPECT_TRUE(contains_point(r.tuples[k].region, x, 1e-9));
    const Eigen::VectorXd y = forward(net, x);
    EXPECT_LE((oracle[k].map * x + oracle[k].shift - y).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, y.norm()));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleAgreement, ::testing::Range(100, 112));

TEST(LineageAffineMap, MatchesReachTuples) {
  std::mt19937_64 rng(9);
  const Network net = test::random_network(rng, 3, {3, 2}, 2);
  const auto r = reach(net, box_lattice(vec({-1, -1, -1}), vec({1, 1, 1})));
  for (const auto& t : r.tuples) {
    auto [M, d] = lineage_affine_map(net, t.lineage, net.layers().size());
    EXPECT_LE((M - t.map).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((d - t.shift).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SampleCheck, NoSamplesPasses) {
  const Network net = test::identity_relu_network(2);
  const auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  const auto rep = sample_check(net, r, vec({-1, -1}), vec({1, 1}), 0, 1, 1e-7);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.samples, 0u);
}

TEST(SampleCheck, SingleRegionLinearNet) {
  Eigen::MatrixXd w(2, 2);
  w << 1, 2, -3, 0.5;
  const Network net({{w, vec({1, -1}), Activation::Linear}});
  const auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  ASSERT_EQ(r.stats.region_count, 1u);
  const auto rep = sample_check(net, r, vec({-1, -1}), vec({1, 1}), 500, 3, 1e-7);
  EXPECT_TRUE(rep.passed());
  EXPECT_LE(rep.max_deviation, 1e-12);
}

TEST(SampleCheck, RandomNetworkPassesAndIsWorkerIndependent) {
  std::mt19937_64 rng(17);
  const Network net = test::random_network(rng, 3, {5, 4}, 2);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -1.0), hi = Eigen::VectorXd::Ones(3);
  const auto r = reach(net, box_lattice(lo, hi));
  const auto a = sample_check(net, r, lo, hi, 1000, 5, 1e-7, 1);
  const auto b = sample_check(net, r, lo, hi, 1000, 5, 1e-7, 4);
  EXPECT_TRUE(a.passed()) << a.to_json().dump();
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(SampleCheck, DetectsMissingRegion) {
  const Network net = test::identity_relu_network(2);
  auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  r.tuples.pop_back();
  const auto rep = sample_check(net, r, vec({-1, -1}), vec({1, 1}), 400, 2, 1e-7);
  EXPECT_FALSE(rep.passed());
  EXPECT_GT(rep.uncovered, 50u);
}

TEST(SampleCheck, DetectsWrongMap) {
  const Network net = test::identity_relu_network(2);
  auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  r.tuples[0].map(0, 0) += 0.1;
  const auto rep = sample_check(net, r, vec({-1, -1}), vec({1, 1}), 400, 2, 1e-7);
  EXPECT_GT(rep.deviation_failures, 0u);
}

TEST(SampleCheck, DetectsOverlap) {
  const Network net = test::identity_relu_network(2);
  auto r = reach(net, box_lattice(vec({-1, -1}), vec({1, 1})));
  r.tuples[1].region = r.tuples[0].region;  // duplicate coverage of the first quadrant
  r.tuples[1].map = r.tuples[0].map;
  r.tuples[1].shift = r.tuples[0].shift;
  const auto rep = sample_check(net, r, vec({-1, -1}), vec({1, 1}), 400, 2, 1e-7);
  EXPECT_GT(rep.multi_covered_interior, 0u);
}

}  // namespace
}  // namespace lattice_reach
