#include <gtest/gtest.h>

#include "reluid/io.hpp"
#include "test_util.hpp"

using namespace reluid;

TEST(Io, ExactRoundTrip) {
  std::mt19937_64 rng(91);
  for (int t = 0; t < 100; ++t) {
    auto p = testutil::rand_params(rng, testutil::rand_arch(rng, 4, 4));
    auto text = dump(to_json(p));
    auto j = parse_json_text(text, "test");
    EXPECT_EQ(j["scalar_mode"], "exact");
    auto any = any_from_json(j);
    ASSERT_TRUE(std::holds_alternative<Params<Rational>>(any));
    EXPECT_EQ(std::get<Params<Rational>>(any), p);
  }
}

TEST(Io, FloatRoundTripIsBitExact) {
  std::mt19937_64 rng(92);
  for (int t = 0; t < 100; ++t) {
    auto p = testutil::planted_shallow(rng, 3, 4, 2);
    auto any = any_from_json(parse_json_text(dump(to_json(p)), "test"));
    ASSERT_TRUE(std::holds_alternative<Params<double>>(any));
    EXPECT_EQ(std::get<Params<double>>(any), p);
  }
}

TEST(Io, MixedEntryForms) {
  auto j = parse_json_text(R"({"widths":[1,2,1],"weights":[[1,"-1"],["1/2",0.25]],"biases":[[0,0],["-3/4"]]})", "inline");
  auto p = params_from_json<Rational>(j);
  EXPECT_EQ(p.weights(1)(1, 0), -1);
  EXPECT_EQ(p.weights(2)(0, 0), Rational(1, 2));
  EXPECT_EQ(p.weights(2)(0, 1), Rational(1, 4));
  EXPECT_EQ(p.bias(2)[0], Rational(-3, 4));
}

TEST(Io, MalformedInput) {
  EXPECT_THROW(parse_json_text("{\"widths\": [1,", "x"), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text("[1,2]", "x")), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,1],"weights":[[1]]})", "x")), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,1],"weights":[["abc"]],"biases":[[0]]})", "x")), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,1],"weights":[[true]],"biases":[[0]]})", "x")), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,0],"weights":[[]],"biases":[[]]})", "x")), MalformedInput);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,1],"weights":[[1]],"biases":[[0]],"scalar_mode":"half"})", "x")),
               MalformedInput);
}

TEST(Io, ShapeErrors) {
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[2],"weights":[],"biases":[]})", "x")), ShapeError);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,1],"weights":[[1],[2]],"biases":[[0],[0]]})", "x")), ShapeError);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[2,1],"weights":[[1]],"biases":[[0]]})", "x")), ShapeError);
  EXPECT_THROW(any_from_json(parse_json_text(R"({"widths":[1,2],"weights":[[1,1]],"biases":[[0]]})", "x")), ShapeError);
}

TEST(Io, HashIsStable) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_NE(fnv1a_hex("a"), fnv1a_hex("b"));
}
