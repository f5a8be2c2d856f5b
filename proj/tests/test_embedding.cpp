#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace reluid;

namespace {

std::vector<Rational> qs(std::initializer_list<Rational> v) { return v; }

}  // namespace

TEST(PathIndex, Counts) {
  PathIndex a(Architecture({1, 2, 1}));
  EXPECT_EQ(a.p_count(0), 2u);
  EXPECT_EQ(a.p_count(1), 2u);
  EXPECT_EQ(a.p_count(2), 1u);
  EXPECT_EQ(a.q_count(1), 2u);
  EXPECT_EQ(PathIndex(Architecture({2, 2, 1, 1})).p_count(0), 4u);
  PathIndex c(Architecture({1, 1}));
  EXPECT_EQ(c.p_count(0), 1u);
  EXPECT_EQ(c.q_size(), 0u);
}

TEST(PathIndex, ProductFormulasAndRoundTrip) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    PathIndex idx(a);
    for (std::size_t l = 0; l <= a.depth(); ++l) {
      std::size_t c = 1;
      for (std::size_t k = l; k <= a.depth(); ++k) c *= a.width(k);
      EXPECT_EQ(idx.p_count(l), c);
    }
    for (std::size_t l = 1; l < a.depth(); ++l) {
      std::size_t c = 1;
      for (std::size_t k = l; k < a.depth(); ++k) c *= a.width(k);
      EXPECT_EQ(idx.q_count(l), c);
    }
    for (std::size_t i = 0; i < idx.p_size(); ++i) EXPECT_EQ(idx.encode_p(idx.decode_p(i)), i);
  }
}

TEST(PathIndex, BudgetRefusal) {
  EXPECT_THROW(PathIndex(Architecture({8, 8, 8, 8, 8}), 1000), PathBudgetExceeded);
}

TEST(Embed, AbsNetwork) {
  auto e = embed(abs_network<Rational>());
  EXPECT_EQ(e.phi, qs({1, -1, 0, 0, 0}));
  EXPECT_EQ(e.index.key(0), "μ0->ν1.0->η0");
  EXPECT_EQ(e.index.key(2), "b:ν1.0->η0");
  EXPECT_EQ(e.index.key(4), "b:η0");
}

TEST(Embed, IdentityFamily) {
  for (Rational t : {Rational(0), Rational(1), Rational(-7, 3)}) {
    auto e = embed(identity_family<Rational>(t));
    EXPECT_EQ(e.phi, qs({1, 1, -t, -t, t}));
  }
}

TEST(Embed, MatchesRecursiveReference) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 200; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    auto p = testutil::rand_params(rng, a);
    auto e = embed(p);
    auto ref = testutil::naive_embedding(p);
    ASSERT_EQ(ref.size(), e.phi.size());
    for (std::size_t i = 0; i < e.phi.size(); ++i) EXPECT_EQ(ref.at(e.index.key(i)), e.phi[i]) << e.index.key(i);
  }
}

TEST(Embed, SingleNeuronRescaleInvariance) {
  std::mt19937_64 rng(23);
  auto p = testutil::rand_params(rng, Architecture({3, 4, 2}));
  auto q = p;
  for (std::size_t j = 0; j < 3; ++j) q.weights(1)(2, j) *= 3;
  q.bias(1)[2] *= 3;
  for (std::size_t k = 0; k < 2; ++k) q.weights(2)(k, 2) /= 3;
  EXPECT_EQ(embed(p).phi, embed(q).phi);
}

TEST(Embed, RescaleInvarianceRandom) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 200; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    auto p = testutil::rand_params(rng, a);
    EXPECT_EQ(embed(rescale(p, testutil::rand_rescaling(rng, a))).phi, embed(p).phi);
  }
}

TEST(Embed, PermutationCovariance) {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 100; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    auto p = testutil::rand_params(rng, a);
    auto pi = testutil::rand_permutation(rng, a);
    auto e = embed(p), f = embed(permute(p, pi));
    for (std::size_t i = 0; i < e.phi.size(); ++i) {
      Path path = e.index.decode_p(i);
      for (std::size_t k = path.start; k <= a.depth(); ++k)
        if (k >= 1 && k < a.depth()) path.nodes[k - path.start] = pi.pi[k - 1][path.nodes[k - path.start]];
      EXPECT_EQ(f.phi[f.index.encode_p(path)], e.phi[i]);
    }
  }
}

TEST(ApplyP, Definition) {
  Architecture a({1, 1, 1});
  std::vector<Rational> u(a.param_count(), Rational(0));
  EXPECT_EQ(apply_P(a, std::span<const Rational>(u)), std::vector<Rational>(3, Rational(0)));
  ParamLayout lay(a);
  u[lay.bias(1, 0)] = 1;
  EXPECT_EQ(apply_P(a, std::span<const Rational>(u)), qs({0, 1, 0}));
}

TEST(ApplyP, ExponentialIdentity) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 50; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    std::vector<double> alpha(a.param_count());
    for (auto& v : alpha) v = U(rng);
    std::vector<double> theta(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) theta[i] = std::exp(alpha[i]);
    auto phi = embed(Params<double>::unflatten(a, theta)).phi;
    auto Pa = apply_P(a, std::span<const double>(alpha));
    for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_NEAR(phi[i], std::exp(Pa[i]), 1e-12 * std::exp(Pa[i]));
  }
}

TEST(Realization, AbsExamples) {
  auto p = abs_network<Rational>();
  std::vector<Rational> x{-3};
  EXPECT_EQ(algebraic_realization(p, std::span<const Rational>(x))[0], 3);
  std::vector<Rational> y{2};
  EXPECT_EQ(embedding_realization(p, std::span<const Rational>(y))[0], 2);
  EXPECT_EQ(path_activation_vector(p, std::span<const Rational>(y)), (std::vector<int>{1, 0, 1}));
}

TEST(Realization, AllInactiveGivesOutputBias) {
  Params<Rational> p(Architecture({2, 3, 2}));
  for (auto& w : p.weights(1).data) w = 1;
  for (auto& b : p.bias(1)) b = -10;
  for (auto& w : p.weights(2).data) w = 5;
  p.bias(2) = qs({Rational(1, 2), -4});
  std::vector<Rational> x{1, 2};
  EXPECT_EQ(algebraic_realization(p, std::span<const Rational>(x)), p.bias(2));
}

TEST(Realization, EmbeddingFormulaNeedsHiddenLayer) {
  Params<Rational> p(Architecture({2, 1}));
  std::vector<Rational> x{1, 2};
  EXPECT_THROW(embedding_realization(p, std::span<const Rational>(x)), UnsupportedDepth);
}

TEST(Realization, TripleEquality) {
  std::mt19937_64 rng(27);
  for (int t = 0; t < 300; ++t) {
    std::uniform_int_distribution<std::size_t> D(2, 4), W(1, 6);
    std::vector<std::size_t> w(D(rng) + 1);
    for (auto& v : w) v = W(rng);
    auto p = testutil::rand_params(rng, Architecture(w));
    auto x = testutil::rand_input(rng, w[0]);
    auto y = forward(p, x);
    EXPECT_EQ(algebraic_realization(p, std::span<const Rational>(x)), y);
    EXPECT_EQ(embedding_realization(p, std::span<const Rational>(x)), y);
    auto Lm = realization_operator(p, std::span<const Rational>(x));
    EXPECT_EQ(matvec(Lm, std::span<const Rational>(embed(p).phi)), y);
  }
}

TEST(Realization, FrozenPatternNearby) {
  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> U(-1, 1);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    auto p = testutil::rand_params(rng, Architecture({3, 4, 3, 2}));
    auto x = testutil::rand_input(rng, 3);
    if (in_xcont(p, std::span<const Rational>(x), 1e-3) != XCont::inside) continue;
    auto q = p;
    for (std::size_t l = 1; l <= q.depth(); ++l) {
      for (auto& v : q.weights(l).data) v += Rational(U(rng)) * Rational(1, 1000000);
      for (auto& v : q.bias(l)) v += Rational(U(rng)) * Rational(1, 1000000);
    }
    if (activation_pattern(q, std::span<const Rational>(x)) != activation_pattern(p, std::span<const Rational>(x))) continue;
    auto Lm = realization_operator(p, std::span<const Rational>(x));
    EXPECT_EQ(matvec(Lm, std::span<const Rational>(embed(q).phi)), forward(q, x));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Support, Examples) {
  auto abs_rep = support_check(abs_network<Rational>());
  EXPECT_TRUE(abs_rep.admissible);
  EXPECT_TRUE(abs_rep.equality_holds);
  EXPECT_TRUE(abs_rep.uncovered_support.empty());

  auto dead = abs_network<Rational>();
  dead.weights(2)(0, 1) = 0;
  auto r = support_check(dead);
  EXPECT_TRUE(r.inclusion_holds);
  EXPECT_FALSE(r.equality_holds);
  ParamLayout lay(dead.arch());
  EXPECT_EQ(r.uncovered_support, (std::vector<std::size_t>{lay.edge(1, 1, 0, 1)}));

  auto zero = support_check(Params<Rational>(Architecture({2, 3, 1})));
  EXPECT_TRUE(zero.support.empty());
  EXPECT_TRUE(zero.covered.empty());
}

TEST(Support, RandomInclusion) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 100; ++t) {
    auto a = testutil::rand_arch(rng, 4, 4);
    auto p = testutil::rand_params(rng, a);
    auto r = support_check(p);
    EXPECT_TRUE(r.inclusion_holds);
    EXPECT_TRUE(r.spurious.empty());
    if (r.admissible) EXPECT_TRUE(r.equality_holds);
  }
}
