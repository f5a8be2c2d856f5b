#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace reluid;

namespace {

// Planted unit j as a unit-normal hyperplane with the library's sign convention, plus the sign used.
Hyperplane truth_plane(const Params<double>& p, std::size_t j, int* sign = nullptr) {
  Hyperplane h;
  double n = 0;
  for (std::size_t i = 0; i < p.arch().input_dim(); ++i) n += p.weights(1)(j, i) * p.weights(1)(j, i);
  n = std::sqrt(n);
  for (std::size_t i = 0; i < p.arch().input_dim(); ++i) h.w.push_back(p.weights(1)(j, i) / n);
  h.b = p.bias(1)[j] / n;
  auto w0 = h.w;
  detail::canonical_sign(h.w, h.b);
  if (sign) *sign = h.w == w0 ? 1 : -1;
  return h;
}

double angle(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return std::acos(std::min(1.0, std::fabs(d)));
}

const Hyperplane* closest(const std::vector<Hyperplane>& planes, const Hyperplane& t) {
  const Hyperplane* best = nullptr;
  double ba = 10;
  for (const auto& h : planes) {
    double a = angle(h.w, t.w) + std::fabs(h.b - t.b);
    if (a < ba) {
      ba = a;
      best = &h;
    }
  }
  return best;
}

}  // namespace

TEST(Oracle, CountsAndBudget) {
  auto o = network_oracle(abs_network<Rational>(), 3);
  std::vector<double> x{-2.0};
  EXPECT_DOUBLE_EQ(o(x)[0], 2.0);
  auto copy = o;
  copy(x);
  EXPECT_EQ(o.queries(), 2u);
  o(x);
  EXPECT_THROW(o(x), BudgetExhausted);
  EXPECT_EQ(o.queries(), 3u);
  std::vector<double> bad{1.0, 2.0};
  EXPECT_THROW(network_oracle(abs_network<Rational>(), 10)(bad), ShapeError);
  EXPECT_EQ(default_query_budget(3, 4), 200u * 4 * 5);
}

TEST(Detect, NonlocalPlanes) {
  auto f = network_oracle(nonlocal_pair<Rational>().theta, default_query_budget(1));
  auto r = detect_hyperplanes(f);
  ASSERT_EQ(r.planes.size(), 2u);
  std::vector<double> bs{r.planes[0].b, r.planes[1].b};
  std::sort(bs.begin(), bs.end());
  EXPECT_NEAR(bs[0], -1.0, 1e-8);
  EXPECT_NEAR(bs[1], 0.0, 1e-8);
  for (const auto& h : r.planes) EXPECT_DOUBLE_EQ(h.w[0], 1.0);
}

TEST(Recover, NonlocalOuterProducts) {
  auto f = network_oracle(nonlocal_pair<Rational>().theta, default_query_budget(1));
  auto m = recover_shallow(f);
  ASSERT_EQ(m.units.size(), 2u);
  // the target is reducible: both jumps are +1 and either orientation of a unit fits
  ASSERT_EQ(m.violations.size(), 1u);
  EXPECT_NE(m.violations[0].find("orientation is not unique"), std::string::npos);
  EXPECT_TRUE(m.verified);
  for (const auto& u : m.units) EXPECT_NEAR(u.outer(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(m.c[0], 0.0, 1e-6);
}

TEST(Recover, PlantedPlanesAndOuters) {
  std::mt19937_64 rng(81);
  for (int t = 0; t < 10; ++t) {
    auto p = testutil::planted_shallow(rng, 3, 4, 2);
    RecoverOptions o;
    o.detect.seed = t;
    auto m = recover_shallow(network_oracle(p, default_query_budget(3)), o);
    ASSERT_EQ(m.units.size(), 4u) << "trial " << t;
    ASSERT_EQ(m.detection.planes.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j) {
      int s = 1;
      auto tp = truth_plane(p, j, &s);
      const Hyperplane* h = closest(m.detection.planes, tp);
      ASSERT_NE(h, nullptr);
      EXPECT_LE(angle(h->w, tp.w), 1e-6);
      EXPECT_NEAR(h->b, tp.b, 1e-6);
      // jump across the detected normal is s v w^T
      std::size_t idx = static_cast<std::size_t>(h - m.detection.planes.data());
      Eigen::MatrixXd vw(2, 3);
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t i = 0; i < 3; ++i) vw(r, i) = s * p.weights(2)(r, j) * p.weights(1)(j, i);
      const auto& O = m.units[idx].outer;
      EXPECT_LE((O - vw).norm(), 1e-5 * vw.norm());
    }
  }
}

TEST(Recover, PlantedRoundTripIsPs) {
  std::mt19937_64 rng(82);
  std::uniform_int_distribution<std::size_t> D(1, 4), H(1, 6), K(1, 3);
  PsOptions po;
  po.tol.rtol = 1e-8;
  for (int t = 0; t < 50; ++t) {
    std::size_t d = D(rng), h = H(rng), k = K(rng);
    auto p = testutil::planted_shallow(rng, d, h, k);
    auto f = network_oracle(p, default_query_budget(d));
    RecoverOptions o;
    o.detect.seed = t;
    auto m = recover_shallow(f, o);
    ASSERT_TRUE(m.params) << "trial " << t << " d=" << d << " h=" << h;
    EXPECT_TRUE(m.violations.empty()) << m.violations.front();
    EXPECT_LE(m.verify_error, 1e-6 * m.verify_scale);
    EXPECT_LE(m.queries, f.budget());
    EXPECT_EQ(check_ps_equivalent(p, *m.params, po).kind, Relation::PS) << "trial " << t;
  }
}

TEST(Recover, AffineTargets) {
  Oracle constant([](std::span<const double>) { return std::vector<double>{2.5, -1.0}; }, 2, 2, 100000);
  auto m = recover_shallow(constant);
  EXPECT_TRUE(m.units.empty());
  EXPECT_FALSE(m.params);
  EXPECT_NEAR(m.c[0], 2.5, 1e-12);
  EXPECT_NEAR(m.c[1], -1.0, 1e-12);
  EXPECT_TRUE(m.verified);

  Oracle affine([](std::span<const double> x) { return std::vector<double>{3 * x[0] - x[1] + 1}; }, 2, 1, 100000);
  auto a = recover_shallow(affine);
  EXPECT_TRUE(a.units.empty());
  EXPECT_NEAR(a.linear[0][0], 3.0, 1e-9);
  EXPECT_NEAR(a.linear[0][1], -1.0, 1e-9);
  EXPECT_NEAR(a.c[0], 1.0, 1e-9);
  EXPECT_TRUE(a.verified);
}

TEST(Recover, NegativeTwinViolatesHypotheses) {
  std::mt19937_64 rng(83);
  auto p = testutil::planted_shallow(rng, 2, 3, 1);
  for (std::size_t i = 0; i < 2; ++i) p.weights(1)(1, i) = -2 * p.weights(1)(0, i);
  p.bias(1)[1] = -2 * p.bias(1)[0];
  RecoverOptions o;
  o.expected_units = 3;
  auto m = recover_shallow(network_oracle(p, default_query_budget(2)), o);
  EXPECT_EQ(m.detection.planes.size(), 2u);
  EXPECT_FALSE(m.violations.empty());
  EXPECT_FALSE(m.params);
}

TEST(Recover, AbsIsFlagged) {
  auto m = recover_shallow(network_oracle(abs_network<Rational>(), default_query_budget(1)));
  EXPECT_EQ(m.detection.planes.size(), 1u);
  EXPECT_FALSE(m.violations.empty());
  EXPECT_FALSE(m.params);
}

TEST(Recover, BudgetExhaustionIsPartial) {
  std::mt19937_64 rng(84);
  auto p = testutil::planted_shallow(rng, 2, 3, 1);
  auto f = network_oracle(p, 50);
  auto m = recover_shallow(f);
  EXPECT_TRUE(m.partial);
  EXPECT_FALSE(m.params);
  EXPECT_EQ(m.queries, 50u);
}

TEST(CountUnits, Examples) {
  std::mt19937_64 rng(85);
  auto a = testutil::planted_shallow(rng, 2, 3, 1);
  auto b = testutil::planted_shallow(rng, 2, 4, 1);
  auto c = count_units(network_oracle(a, default_query_budget(2)), network_oracle(b, default_query_budget(2)));
  EXPECT_EQ(c.a, 3u);
  EXPECT_EQ(c.b, 4u);
  EXPECT_FALSE(c.equal());

  auto q = rescale(permute(convert<Rational>(a), Permutation{{{2, 0, 1}}}), Rescaling<Rational>{{{Rational(2), Rational(1, 3), Rational(5)}}});
  auto e = count_units(network_oracle(a, default_query_budget(2)), network_oracle(q, default_query_budget(2)));
  EXPECT_TRUE(e.equal());

  Oracle z1([](std::span<const double> x) { return std::vector<double>{x[0]}; }, 1, 1, 100000);
  Oracle z2([](std::span<const double>) { return std::vector<double>{4.0}; }, 1, 1, 100000);
  auto zz = count_units(z1, z2);
  EXPECT_EQ(zz.a, 0u);
  EXPECT_EQ(zz.b, 0u);
}
