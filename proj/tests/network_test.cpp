#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "lattice_reach/network.hpp"
#include "support/generators.hpp"

namespace lattice_reach {
namespace {

using test::vec;

std::string fixture(const char* name) { return std::string(LATTICE_REACH_FIXTURES) + "/" + name; }

Network load(const char* name) {
  std::ifstream in(fixture(name));
  EXPECT_TRUE(in.good()) << name;
  return parse_nnet(in);
}

TEST(ParseNnet, HandWrittenFixture) {
  const Network net = load("tiny_2_2_1.nnet");
  ASSERT_EQ(net.layers().size(), 2u);
  EXPECT_EQ(net.layers()[0].width(), 2u);
  EXPECT_EQ(net.layers()[1].width(), 1u);
  EXPECT_EQ(net.input_dim(), 2u);
  EXPECT_EQ(net.output_dim(), 1u);
  EXPECT_EQ(net.layers()[0].activation, Activation::ReLU);
  EXPECT_EQ(net.layers()[1].activation, Activation::Linear);
  Eigen::MatrixXd w(2, 2);
  w << 1, 1, 1, -1;
  EXPECT_EQ(net.layers()[0].weights, w);
  EXPECT_EQ(net.layers()[1].bias(0), -0.5);
  ASSERT_TRUE(net.normalization());
  EXPECT_EQ(net.normalization()->output_range(), 4.0);
  EXPECT_EQ(net.normalization()->output_mean(), 1.0);
}

void expect_parse_error_at(const char* name, std::size_t line) {
  try {
    load(name);
    FAIL() << name << " parsed";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_NE(std::string(e.what()).find(std::to_string(line)), std::string::npos) << e.what();
  }
}

TEST(ParseNnet, TruncatedWeightRowNamesLine) { expect_parse_error_at("truncated_row.nnet", 11); }
TEST(ParseNnet, NonNumericTokenNamesLine) { expect_parse_error_at("bad_token.nnet", 11); }
TEST(ParseNnet, LayerSizeMismatch) { expect_parse_error_at("bad_sizes.nnet", 4); }

TEST(ParseNnet, MalformedHeader) {
  EXPECT_THROW(parse_nnet("// only a comment\n2,2,\n"), ParseError);
  EXPECT_THROW(parse_nnet(""), ParseError);
  EXPECT_THROW(parse_nnet("0,2,1,2,\n"), ParseError);
}

TEST(ParseNnet, EndOfFileInsideWeights) {
  std::ifstream in(fixture("tiny_2_2_1.nnet"));
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  text.resize(text.rfind("1.0,1.0,"));
  EXPECT_THROW(parse_nnet(text), ParseError);
}

TEST(ParseNnet, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  Network net = test::random_network(rng, 3, {4, 5}, 2);
  Normalization z{vec({-1, -2, -3}), vec({1, 2, 3}), vec({0.1, 0.2, 0.3, 0.7}), vec({1.5, 2.5, 3.5, 9.25})};
  net = Network(net.layers(), z);
  std::ostringstream out;
  write_nnet(out, net);
  const Network back = parse_nnet(out.str());
  ASSERT_EQ(back.layers().size(), net.layers().size());
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    EXPECT_EQ(back.layers()[i].weights, net.layers()[i].weights);
    EXPECT_EQ(back.layers()[i].bias, net.layers()[i].bias);
    EXPECT_EQ(back.layers()[i].activation, net.layers()[i].activation);
  }
  EXPECT_EQ(back.normalization()->means, z.means);
  EXPECT_EQ(back.normalization()->ranges, z.ranges);
  std::ostringstream again;
  write_nnet(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(NetworkJson, RoundTrip) {
  std::mt19937_64 rng(6);
  const Network net = test::random_network(rng, 2, {3}, 2);
  const Network back = network_from_json(nlohmann::json::parse(network_to_json(net).dump()));
  EXPECT_EQ(back.layers()[0].weights, net.layers()[0].weights);
  EXPECT_EQ(back.layers()[1].bias, net.layers()[1].bias);
  EXPECT_FALSE(back.normalization());
}

TEST(NetworkJson, RejectsBadShapes) {
  auto j = network_to_json(test::identity_relu_network(2));
  j["layers"][1]["weights"] = {{1, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(network_from_json(j), Error);
  j = network_to_json(test::identity_relu_network(2));
  j["layers"][0]["activation"] = "tanh";
  EXPECT_THROW(network_from_json(j), Error);
}

TEST(Network, RejectsInconsistentLayers) {
  EXPECT_THROW(Network(std::vector<Layer>{}), InvalidArgument);
  EXPECT_THROW(Network({{Eigen::MatrixXd::Identity(2, 2), vec({0}), Activation::ReLU}}), DimensionError);
  EXPECT_THROW(Network({{Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), Activation::ReLU},
                        {Eigen::MatrixXd::Identity(3, 3), vec({0, 0, 0}), Activation::Linear}}),
               DimensionError);
}

TEST(Forward, LinearIdentity) {
  const Network net({{Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), Activation::Linear}});
  EXPECT_EQ(forward(net, vec({3, -2})), vec({3, -2}));
}

TEST(Forward, ReluIdentity) {
  const Network net({{Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), Activation::ReLU}});
  EXPECT_EQ(forward(net, vec({3, -2})), vec({3, 0}));
}

TEST(Forward, TwoLayerHandEvaluation) {
  Eigen::MatrixXd w1(2, 2), w2(1, 2);
  w1 << 1, 1, 1, -1;
  w2 << 1, 1;
  const Network net({{w1, vec({0, 0}), Activation::ReLU}, {w2, vec({0}), Activation::Linear}});
  EXPECT_EQ(forward(net, vec({1, 2})), vec({3}));
  EXPECT_THROW(forward(net, vec({1})), DimensionError);
}

TEST(Normalization, AbsentIsIdentity) {
  const Network net = test::identity_relu_network(2);
  EXPECT_EQ(normalize_input(net, vec({5, -7})), vec({5, -7}));
  EXPECT_EQ(denormalize_output(net, vec({5, -7})), vec({5, -7}));
}

TEST(Normalization, ClampsBelowMinimum) {
  const Network net = load("tiny_2_2_1.nnet");
  // x0 = -5 clamps to -1 -> (-1 - 0.5) / 2
  const Eigen::VectorXd z = normalize_input(net, vec({-5, 0.25}));
  EXPECT_DOUBLE_EQ(z(0), -0.75);
  EXPECT_DOUBLE_EQ(z(1), 0.25);
  EXPECT_EQ(normalize_input(net, vec({-5, 0})), normalize_input(net, vec({-1, 0})));
}

TEST(Normalization, RawEvaluationOnFixture) {
  const Network net = load("tiny_2_2_1.nnet");
  // x = (0.9, 0.1): normalized (0.2, 0.1); relu(0.3) + relu(0.1) - 0.5 = -0.1; raw 4 * -0.1 + 1
  EXPECT_NEAR(evaluate_raw(net, vec({0.9, 0.1}))(0), 0.6, 1e-15);
  const Eigen::VectorXd x = vec({0.3, -0.4});
  EXPECT_TRUE(denormalize_input(net, normalize_input(net, x)).isApprox(x, 1e-15));
  EXPECT_EQ(denormalize_output(net, forward(net, normalize_input(net, x))), evaluate_raw(net, x));
}

}  // namespace
}  // namespace lattice_reach
