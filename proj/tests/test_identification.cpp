#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "test_util.hpp"

using namespace reluid;

namespace {

IdentificationSet build(const Params<Rational>& p, std::uint64_t seed = 0) {
  return construct_identification_set(p, sample_activation_space(p, 300, seed));
}

}  // namespace

TEST(IdentificationSet, CardinalityBounds) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 3, 1);
    auto F = build(p, t);
    EXPECT_EQ(F.bound_used, 12u);
    EXPECT_LE(F.points.size(), 12u);
    EXPECT_EQ(F.anchors.size(), 4u);
  }
  auto F = build(abs_network<Rational>());
  EXPECT_LE(F.points.size(), 4u);
  for (const auto& x : F.points) EXPECT_NE(x[0], 0.0);

  auto deep = testutil::rand_params(rng, Architecture({2, 2, 2, 1}), true);
  auto s = sample_activation_space(deep, 300, 1);
  auto G = construct_identification_set(deep, s);
  EXPECT_LE(G.points.size(), 3 * s.actdim);
}

TEST(IdentificationSet, AnchorsAndPatternConstancy) {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 30; ++t) {
    auto p = testutil::rand_params(rng, t % 2 ? Architecture({2, 3, 1}) : Architecture({3, 3, 2, 2}), true);
    if (!is_admissible(p).admissible) continue;
    auto F = build(p, t);
    auto pf = convert<double>(p);
    const std::size_t d = p.arch().input_dim();
    for (const auto& a : F.anchors) {
      EXPECT_EQ(in_xcont(pf, std::span<const double>(a.z), 1e-9), XCont::inside);
      auto base = activation_pattern(pf, std::span<const double>(a.z));
      for (std::size_t i = 0; i <= d; ++i) {
        const auto& x = F.points[a.first_point + i];
        EXPECT_EQ(activation_pattern(pf, std::span<const double>(x)), base);
        double dist = 0;
        for (std::size_t k = 0; k < d; ++k) dist += (x[k] - a.z[k]) * (x[k] - a.z[k]);
        EXPECT_LT(std::sqrt(dist), a.r);
      }
    }
  }
}

TEST(IdentificationSet, LocalAffinity) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 3, 2);
    auto F = build(p, t);
    auto pf = convert<double>(p);
    const std::size_t d = 2;
    for (const auto& a : F.anchors) {
      // affine interpolant through z and z + (r/2) e_i
      const auto& z = F.points[a.first_point];
      auto y0 = forward(pf, z);
      Eigen::MatrixXd J(y0.size(), d);
      for (std::size_t i = 0; i < d; ++i) {
        auto yi = forward(pf, F.points[a.first_point + 1 + i]);
        for (std::size_t k = 0; k < y0.size(); ++k) J(k, i) = (yi[k] - y0[k]) / (a.r / 2);
      }
      for (int s = 0; s < 20; ++s) {
        std::vector<double> x = z;
        for (auto& v : x) v += (U(rng) - 0.5) * a.r / 2;
        auto y = forward(pf, x);
        for (std::size_t k = 0; k < y.size(); ++k) {
          double pred = y0[k];
          for (std::size_t i = 0; i < d; ++i) pred += J(k, i) * (x[i] - z[i]);
          EXPECT_NEAR(y[k], pred, 1e-9 * std::max(1.0, std::fabs(y[k])));
        }
      }
    }
  }
}

TEST(IdentificationSet, RequiresWitnesses) {
  auto p = abs_network<Rational>();
  EXPECT_THROW(construct_identification_set(p, shallow_activation_space(p)), std::domain_error);
}

TEST(Validation, NoTwinHasNoFalsifiers) {
  std::mt19937_64 rng(64);
  for (int t = 0; t < 3; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 3, 1);
    auto F = build(p, t);
    ValidationOptions o;
    o.trials = 500;
    o.eps = 1e-3;
    o.seed = t;
    auto r = validate_identification_set(p, F, o);
    EXPECT_EQ(r.scaling_failures, 0u);
    EXPECT_TRUE(r.falsifiers.empty());
    EXPECT_GT(r.perturbation_trials - r.perturbation_equivalent, 400u);
  }
}

TEST(Validation, PositiveTwinFalsified) {
  Params<Rational> p(Architecture({1, 3, 1}));
  p.weights(1)(0, 0) = 1;
  p.weights(1)(1, 0) = 2;
  p.weights(1)(2, 0) = -1;
  p.bias(1) = {Rational(1, 2), 1, 3};
  p.weights(2)(0, 0) = 1;
  p.weights(2)(0, 1) = -3;
  p.weights(2)(0, 2) = 2;
  auto F = build(p);
  ValidationOptions o;
  o.trials = 50;
  auto r = validate_identification_set(p, F, o);
  EXPECT_EQ(r.structured_trials, 1u);
  ASSERT_FALSE(r.falsifiers.empty());
  EXPECT_EQ(r.falsifiers.back().source, "positive-twin-collapse");
}

TEST(Validation, IdenticalNetworkIsScalingEquivalent) {
  auto p = identity_family<Rational>(1);
  auto w = check_scaling_equivalent(p, p);
  ASSERT_EQ(w.kind, Relation::S);
  EXPECT_EQ(*w.rescaling, Rescaling<Rational>::identity(p.arch()));
}
