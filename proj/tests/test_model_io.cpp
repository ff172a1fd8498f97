#include <gtest/gtest.h>

#include "support.hpp"

using namespace snnsafe;
using namespace snnsafe::test;

TEST(NetworkFile, ZeroNetworkLoads)
{
    const auto net = io::parse_network(R"({"layer_sizes": [2, 2, 1], "activation": "relu",
        "weights": [[[0, 0], [0, 0]], [[0, 0]]], "biases": [[0, 0], [0]]})");
    EXPECT_EQ(net.layer_sizes, (std::vector<std::size_t>{2, 2, 1}));
    EXPECT_EQ(net.hidden_layer_count(), 1u);
}

TEST(NetworkFile, DemoFixtureMatchesTopology)
{
    const auto net = io::load_network(fixture("demo.ann.json"));
    EXPECT_TRUE(net.same_topology(demo_ann()));
    EXPECT_EQ(net.weights[0], demo_ann().weights[0]);
    EXPECT_EQ(net.weights[1], demo_ann().weights[1]);
    EXPECT_EQ(net.neuron_count(), 5u);
    EXPECT_EQ(net.neuron_id(1, 1), 3u);
}

TEST(NetworkFile, WrongRowWidthIsShapeError)
{
    EXPECT_THROW(io::parse_network(R"({"layer_sizes": [2, 2, 1], "activation": "relu",
        "weights": [[[1, 2, 3], [0, 0, 0]], [[0, 0]]], "biases": [[0, 0], [0]]})"),
                 ShapeError);
}

TEST(NetworkFile, RejectsOtherActivations)
{
    EXPECT_THROW(io::parse_network(R"({"layer_sizes": [1, 1, 1], "activation": "tanh",
        "weights": [[[1]], [[1]]], "biases": [[0], [0]]})"),
                 UnsupportedActivation);
}

TEST(NetworkFile, MalformedJsonIsParseError)
{
    EXPECT_THROW(io::parse_network("{\"layer_sizes\": [2, 2"), ParseError);
    EXPECT_THROW(io::parse_network(R"({"layer_sizes": [1, 1, 1]})"), ParseError);
}

TEST(NetworkFile, NoHiddenLayerRejected)
{
    EXPECT_THROW(io::parse_network(R"({"layer_sizes": [2, 1], "activation": "relu",
        "weights": [[[1, 1]]], "biases": [[0]]})"),
                 ShapeError);
}

TEST(NetworkFile, MissingFileIsIoError) { EXPECT_THROW(io::load_network("/nonexistent/net.json"), IoError); }

TEST(NetworkFile, RoundTripPreservesStructure)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto net = random_ann(rng, {4, 4});
        const auto back = io::parse_network(io::serialize(net));
        ASSERT_TRUE(back.same_topology(net));
        for (std::size_t k = 0; k < net.weights.size(); ++k) {
            EXPECT_EQ(back.weights[k], net.weights[k]);
            EXPECT_EQ(back.biases[k], net.biases[k]);
        }
    }
}

TEST(NetworkFile, SpikingRoundTrip)
{
    auto snn = convert::ann_to_snn(demo_ann(), 0.5, 0.75);
    const auto back = io::parse_spiking_network(io::serialize(snn));
    EXPECT_EQ(back.leak, 0.75);
    EXPECT_EQ(back.thresholds[0], snn.thresholds[0]);
    EXPECT_EQ(io::file_activation(io::serialize(snn)), Activation::SRLA);
    EXPECT_EQ(io::file_activation(io::serialize(demo_ann())), Activation::ReLU);
}

TEST(SpikingNetwork, ValidatesThetaAndLeak)
{
    auto snn = demo_snn();
    snn.thresholds[0](1) = 0.0;
    EXPECT_THROW(snn.validate(), InvalidTheta);
    snn = demo_snn();
    snn.leak = 1.5;
    EXPECT_THROW(snn.validate(), InvalidLeak);
    EXPECT_EQ(demo_snn().threshold(2, 0), 1.0);
}

TEST(RangeFile, SingleOutput)
{
    const auto r = io::load_ranges(fixture("lip.range"), 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_DOUBLE_EQ(r[0].lower, -15.50883);
    EXPECT_DOUBLE_EQ(r[0].upper, 15.34465);
}

TEST(RangeFile, TwoOutputs)
{
    const auto r = io::load_ranges(fixture("dp.range"), 2);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0].lower, -5.86571);
    EXPECT_DOUBLE_EQ(r[0].upper, -3.69253);
    EXPECT_DOUBLE_EQ(r[1].lower, -6.35836);
    EXPECT_DOUBLE_EQ(r[1].upper, -3.41698);
}

TEST(RangeFile, Errors)
{
    EXPECT_THROW(io::parse_ranges("[1, 1]", 1), DegenerateInterval);
    EXPECT_THROW(io::parse_ranges("[2, 1]", 1), DegenerateInterval);
    EXPECT_THROW(io::parse_ranges("[0, 1]", 2), CountMismatch);
    EXPECT_THROW(io::parse_ranges("[0, 1] junk", 1), ParseError);
}

TEST(RangeFile, UnicodeMinusAndComments)
{
    const auto r = io::parse_ranges("# safe range\n[\xe2\x88\x92" "0.78130, \xe2\x88\x92" "0.54282]\n", 1);
    EXPECT_DOUBLE_EQ(r[0].lower, -0.78130);
    EXPECT_DOUBLE_EQ(r[0].upper, -0.54282);
}

TEST(BoxFile, DegenerateAllowed)
{
    const auto box = io::load_box(fixture("lip.box"), 4);
    EXPECT_EQ(box[1].lower, 0.0);
    EXPECT_EQ(box[1].upper, 0.0);
    EXPECT_FALSE(box.is_point());
    EXPECT_TRUE(io::load_box(fixture("demo.box"), 2).is_point());
    EXPECT_THROW(io::parse_box("[1, 0]", 1), DegenerateInterval);
}

TEST(Containment, MatchesDefinition)
{
    EXPECT_TRUE(contained_in(Interval{1, 2}, Interval{0, 3}));
    EXPECT_TRUE(contained_in(Interval{0, 3}, Interval{0, 3}));
    EXPECT_FALSE(contained_in(Interval{-0.1, 2}, Interval{0, 3}));
}

TEST(Containment, ReflexiveAndTransitive)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-5, 5);
    const auto draw = [&] {
        double a = d(rng), b = d(rng);
        return a < b ? Interval{a, b} : Interval{b, a};
    };
    for (int i = 0; i < 2000; ++i) {
        const Interval a = draw(), b = draw(), c = draw();
        EXPECT_TRUE(contained_in(a, a));
        if (contained_in(a, b) && contained_in(b, c)) {
            EXPECT_TRUE(contained_in(a, c));
        }
        EXPECT_EQ(contained_in(a, b), b.lower <= a.lower && a.upper <= b.upper);
    }
}

TEST(Verdict, ViolationIsNonStrict)
{
    EXPECT_TRUE(violates(4.0, 4.0, BoundSide::Lower));
    EXPECT_TRUE(violates(6.0, 6.0, BoundSide::Upper));
    EXPECT_FALSE(violates(4.0 + 1e-12, 4.0, BoundSide::Lower));
}

TEST(Vector, ParseAndFormat)
{
    const Vector v = io::parse_vector("5, 2");
    EXPECT_EQ(v, vec({5.0, 2.0}));
    EXPECT_EQ(io::parse_vector(io::format_vector(vec({0.1, -3.25e-7}))), vec({0.1, -3.25e-7}));
    EXPECT_THROW(io::parse_vector("5, x"), ParseError);
}
