#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace reluid;
using testutil::relu;

namespace {

Rational at(const Params<Rational>& p, Rational x) { return forward(p, std::vector<Rational>{x})[0]; }

// Equality on 10^4 sampled domain points plus the claimed non-equivalence.
void check_pair(const ExamplePair<Rational>& e, std::mt19937_64& rng, std::size_t min_in_domain = 1000) {
  std::size_t inside = 0;
  for (int k = 0; k < 10000; ++k) {
    auto x = testutil::rand_input(rng, e.theta.arch().input_dim());
    if (!in_domain(e, std::span<const Rational>(x))) continue;
    ++inside;
    ASSERT_EQ(forward(e.theta, x), forward(e.theta_prime, x)) << e.name;
  }
  EXPECT_GE(inside, min_in_domain) << e.name;
  if (e.claimed == ClaimedRelation::not_S)
    EXPECT_EQ(check_scaling_equivalent(e.theta, e.theta_prime).kind, Relation::none) << e.name;
  else
    EXPECT_EQ(check_ps_equivalent(e.theta, e.theta_prime).kind, Relation::none) << e.name;
}

}  // namespace

TEST(Families, IdentityAndNonlocal) {
  EXPECT_EQ(at(identity_family<Rational>(0), 5), 5);
  auto nl = nonlocal_pair<Rational>();
  for (auto* p : {&nl.theta, &nl.theta_prime}) {
    EXPECT_EQ(at(*p, -2), 2);
    EXPECT_EQ(at(*p, Rational(1, 2)), 0);
  }
  EXPECT_EQ(nl.theta.bias(2)[0], 0);
  EXPECT_EQ(nl.theta_prime.bias(2)[0], -1);
}

TEST(Families, AbsShifted) {
  EXPECT_EQ(at(abs_shifted<Rational>(1), Rational(1, 2)), 1);
  EXPECT_EQ(at(abs_shifted<Rational>(1), 2), 2);
  EXPECT_EQ(abs_shifted<Rational>(0), abs_network<Rational>());
}

TEST(Families, GeneratorPairsHoldTheirClaims) {
  std::mt19937_64 rng(71);
  check_pair(identity_pair<Rational>(0, 1), rng);
  check_pair(identity_pair<Rational>(Rational(-1, 3), 2), rng);
  check_pair(nonlocal_pair<Rational>(), rng);
  check_pair(abs_shift_pair<Rational>(Rational(1, 2)), rng, 500);
}

TEST(PositiveTwinCollapse, ZeroEpsIsIdentity) {
  Params<Rational> p(Architecture({1, 2, 1}));
  p.weights(1)(0, 0) = 1;
  p.weights(1)(1, 0) = 3;
  p.bias(1) = {1, 3};
  p.weights(2)(0, 0) = 2;
  p.weights(2)(0, 1) = -1;
  EXPECT_EQ(positive_twin_collapse(p, {1, 0}, {1, 1}, Rational(0)).theta_prime, p);
  EXPECT_THROW(positive_twin_collapse(abs_network<Rational>(), {1, 0}, {1, 1}, Rational(1)), std::domain_error);
}

TEST(PositiveTwinCollapse, ShallowAndDeep) {
  std::mt19937_64 rng(72);
  for (int t = 0; t < 5; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 4, 2);
    Rational r = testutil::rand_pos_q(rng, 4, 3);
    for (std::size_t j = 0; j < 2; ++j) p.weights(1)(2, j) = r * p.weights(1)(0, j);
    p.bias(1)[2] = r * p.bias(1)[0];
    auto e = positive_twin_collapse(p, {1, 0}, {1, 2}, Rational(1, 10));
    check_pair(e, rng);
    EXPECT_EQ(check_ps_equivalent(e.theta, e.theta_prime).kind, Relation::none);
    EXPECT_EQ(find_twins(p).positive_pairs, 1u);
  }
  for (int t = 0; t < 5; ++t) {
    auto p = testutil::rand_params(rng, Architecture({2, 3, 3, 1}), true);
    Rational r = testutil::rand_pos_q(rng, 4, 3);
    for (std::size_t j = 0; j < 3; ++j) p.weights(2)(1, j) = r * p.weights(2)(0, j);
    p.bias(2)[1] = r * p.bias(2)[0];
    check_pair(positive_twin_collapse(p, {2, 0}, {2, 1}, Rational(1, 10)), rng);
  }
}

TEST(NegativeTwinCollapse, AbsWithUnitShift) {
  auto e = negative_twin_collapse(abs_network<Rational>(), {1, 0}, {1, 1}, Rational(1));
  EXPECT_EQ(at(e.theta_prime, Rational(-1, 2)), Rational(1, 2));
  EXPECT_EQ(at(e.theta_prime, Rational(1, 2)), Rational(1, 2));
  EXPECT_EQ(at(e.theta_prime, 2), 2);
  EXPECT_EQ(at(e.theta_prime, -2), 1);
  EXPECT_FALSE(in_domain(e, std::span<const Rational>(std::vector<Rational>{-2})));
  // 2 ReLU(x) - ReLU(x + 1) + 1
  for (Rational x : {Rational(-7, 3), Rational(-1), Rational(0), Rational(5, 4)})
    EXPECT_EQ(at(e.theta_prime, x), 2 * relu(x) - relu(x + 1) + 1);
  std::mt19937_64 rng(73);
  check_pair(e, rng);
}

TEST(NegativeTwinCollapse, BruteForceIdentity) {
  // v1 ReLU(t) + v2 ReLU(-beta t) == (v1 + beta v2) ReLU(t) - beta v2 ReLU(t + M) + beta v2 M for t >= -M
  std::mt19937_64 rng(74);
  for (int k = 0; k < 200; ++k) {
    Rational v1 = testutil::rand_q(rng), v2 = testutil::rand_q(rng, 9, 5, true);
    Rational beta = testutil::rand_pos_q(rng), M = testutil::rand_pos_q(rng);
    for (int i = -40; i <= 40; ++i) {
      Rational t = M * testutil::frac(i, 20);
      Rational lhs = v1 * relu(t) + v2 * relu(-beta * t);
      Rational rhs = (v1 + beta * v2) * relu(t) - beta * v2 * relu(t + M) + beta * v2 * M;
      if (t >= -M) {
        ASSERT_EQ(lhs, rhs);
      }
    }
  }
}

TEST(NegativeTwinCollapse, RandomShallowAndLargeM) {
  std::mt19937_64 rng(75);
  for (int t = 0; t < 5; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 3, 2);
    Rational r = -testutil::rand_pos_q(rng, 4, 3);
    for (std::size_t j = 0; j < 2; ++j) p.weights(1)(1, j) = r * p.weights(1)(0, j);
    p.bias(1)[1] = r * p.bias(1)[0];
    check_pair(negative_twin_collapse(p, {1, 0}, {1, 1}, Rational(2)), rng, 100);
    // with M above every |z| on the sampling box the pair agrees everywhere we sample
    auto e = negative_twin_collapse(p, {1, 0}, {1, 1}, Rational(10000));
    for (int k = 0; k < 1000; ++k) {
      auto x = testutil::rand_input(rng, 2);
      ASSERT_TRUE(in_domain(e, std::span<const Rational>(x)));
      ASSERT_EQ(forward(e.theta, x), forward(e.theta_prime, x));
    }
  }
  EXPECT_THROW(negative_twin_collapse(abs_network<Rational>(), {1, 0}, {1, 1}, Rational(0)), std::domain_error);
}

TEST(ReducibilityCollapse, NonlocalReproducesPair) {
  auto nl = nonlocal_pair<Rational>();
  auto e = reducibility_collapse(nl.theta, 1, {0, 1});
  EXPECT_EQ(e.theta_prime, nl.theta_prime);
  std::mt19937_64 rng(76);
  check_pair(e, rng);
}

TEST(ReducibilityCollapse, AbsAndPrecondition) {
  auto p = abs_network<Rational>();
  auto e = reducibility_collapse(p, 1, {0, 1});
  EXPECT_EQ(e.theta_prime.weights(1)(0, 0), -1);
  EXPECT_EQ(e.theta_prime.weights(1)(1, 0), 1);
  // flipping both neurons of abs is the hidden swap, so the pair stays PS-equivalent
  for (int i = -40; i <= 40; ++i)
    ASSERT_EQ(at(e.theta_prime, testutil::frac(i, 8)), at(p, testutil::frac(i, 8)));
  EXPECT_EQ(check_ps_equivalent(e.theta, e.theta_prime).kind, Relation::PS);
  EXPECT_THROW(reducibility_collapse(p, 1, {0}), std::domain_error);
  EXPECT_THROW(reducibility_collapse(p, 2, {0}), std::domain_error);
}

TEST(ReducibilityCollapse, NoTwinReducibleNetworks) {
  std::mt19937_64 rng(78);
  int found = 0;
  for (int t = 0; t < 300 && found < 20; ++t) {
    Params<Rational> p(Architecture({2, 4, 2}));
    std::uniform_int_distribution<int> I(-2, 2);
    for (std::size_t l = 1; l <= 2; ++l) {
      for (auto& v : p.weights(l).data) v = I(rng);
      for (auto& v : p.bias(l)) v = I(rng);
    }
    if (!is_admissible(p).admissible || find_twins(p).has_twins()) continue;
    auto r = is_irreducible(p);
    if (r.irreducible != Verdict::no) continue;
    ++found;
    check_pair(reducibility_collapse(p, r.witness_layer, r.witness), rng);
  }
  EXPECT_GE(found, 5);
}

TEST(Case2a, AbsMatchesBiasWitness) {
  auto p = abs_network<Rational>();
  auto e = case2a_bias_witness(p, Rational(1, 10));
  EXPECT_EQ(e.theta_prime, scalar_bias_degeneracy_witness(p, {1, 1, -1}, Rational(1, 20)));
  EXPECT_EQ(case2a_bias_witness(p, Rational(0)).theta_prime, p);
  EXPECT_NE(embed(e.theta_prime).phi, embed(p).phi);
  for (int i = 10; i <= 100; ++i) {
    EXPECT_EQ(at(e.theta_prime, testutil::frac(i, 10)), at(p, testutil::frac(i, 10)));
    EXPECT_EQ(at(e.theta_prime, testutil::frac(-i, 10)), at(p, testutil::frac(-i, 10)));
  }
  std::mt19937_64 rng(79);
  check_pair(e, rng);
}

TEST(Case2a, DependentOutgoingRandom) {
  std::mt19937_64 rng(80);
  for (int t = 0; t < 5; ++t) {
    auto p = testutil::generic_shallow(rng, 2, 3, 2);
    Rational r = -testutil::rand_pos_q(rng, 4, 3), alpha = testutil::rand_q(rng, 5, 3, true);
    for (std::size_t j = 0; j < 2; ++j) p.weights(1)(1, j) = r * p.weights(1)(0, j);
    p.bias(1)[1] = r * p.bias(1)[0];
    for (std::size_t k = 0; k < 2; ++k) p.weights(2)(k, 1) = alpha * p.weights(2)(k, 0);
    auto e = case2a_bias_witness(p, Rational(1, 10));
    check_pair(e, rng, 500);
  }
  EXPECT_THROW(case2a_bias_witness(testutil::generic_shallow(rng, 2, 3, 1), Rational(1)), std::domain_error);
}
