#pragma once
// Finite identification sets built around activation-space witnesses, and falsification-style validation.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "activation.hpp"
#include "counterexamples.hpp"
#include "parallel.hpp"

namespace reluid {

struct Anchor {
  std::vector<double> z;
  double r = 0;
  std::size_t first_point = 0;  // F_z occupies points[first_point .. first_point + N_0]
};

struct IdentificationSet {
  std::vector<std::vector<double>> points;
  std::vector<Anchor> anchors;
  std::size_t bound_used = 0;  // (N_0 + 1) * actdim
};

struct IdentificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// min over hidden nu of |z_nu| / (||grad_x z_nu|| + 1) at x, float evaluation.
inline double margin_ratio(const Params<double>& p, std::span<const double> x) {
  ForwardTrace<double> t;
  forward(p, x, &t);
  const std::size_t d = p.arch().input_dim();
  Matrix<double> J = Matrix<double>::identity(d);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l < p.depth(); ++l) {
    Matrix<double> WI = p.weights(l);
    if (l >= 2)
      for (std::size_t j = 0; j < WI.cols; ++j)
        if (!t.status[l - 1][j])
          for (std::size_t i = 0; i < WI.rows; ++i) WI(i, j) = 0;
    J = matmul(WI, J);
    for (std::size_t i = 0; i < J.rows; ++i) {
      double g = 0;
      for (std::size_t j = 0; j < d; ++j) g += J(i, j) * J(i, j);
      best = std::min(best, std::fabs(t.pre[l][i]) / (std::sqrt(g) + 1));
    }
  }
  return best;
}

}  // namespace detail

// F = union over witnesses z of {z} and {z + r(z)/2 e_i}, r(z) the halved margin/gradient ratio,
// shrunk until the activation pattern is constant on each block.
template <class S>
IdentificationSet construct_identification_set(const Params<S>& theta, const ActivationSpace& space) {
  if (!is_admissible(theta).admissible) throw std::domain_error("identification set needs an admissible network");
  if (space.witnesses.size() < space.actdim || space.actdim == 0)
    throw std::domain_error("activation space carries no witnesses; use a sampled space");
  const Params<double> p = convert<double>(theta);
  const std::size_t d = p.arch().input_dim();
  IdentificationSet F;
  F.bound_used = (d + 1) * space.actdim;
  for (std::size_t w = 0; w < space.actdim; ++w) {
    const auto& z = space.witnesses[w];
    double r = p.depth() >= 2 ? detail::margin_ratio(p, std::span<const double>(z)) / 2 : 1.0;
    const auto base = activation_pattern(p, std::span<const double>(z));
    bool ok = false;
    std::vector<std::vector<double>> block;
    for (int halving = 0; halving <= 30 && !ok; ++halving, r /= 2) {
      block.assign(1, z);
      ok = true;
      for (std::size_t i = 0; i < d && ok; ++i) {
        auto x = z;
        x[i] += r / 2;
        ok = activation_pattern(p, std::span<const double>(x)) == base &&
             (p.depth() < 2 || in_xcont(p, std::span<const double>(x), 1e-300) == XCont::inside);
        block.push_back(std::move(x));
      }
      if (ok) {
        F.anchors.push_back({z, r, F.points.size()});
        F.points.insert(F.points.end(), block.begin(), block.end());
      }
    }
    if (!ok) throw IdentificationFailure("activation pattern not constant around witness " + std::to_string(w) +
                                         " after 30 halvings");
  }
  return F;
}

struct Falsifier {
  std::string source;  // "random-perturbation" or "positive-twin-collapse"
  std::size_t trial = 0;
  std::vector<double> theta_prime;  // flat parameters, float view
};

struct ValidationReport {
  std::size_t scaling_trials = 0, scaling_failures = 0;
  std::size_t perturbation_trials = 0, perturbation_equivalent = 0;
  std::size_t structured_trials = 0;
  std::vector<Falsifier> falsifiers;
  double min_separation = std::numeric_limits<double>::infinity();  // smallest max|R' - R| on F seen
};

namespace detail {

template <class S>
std::vector<std::vector<S>> points_as(const std::vector<std::vector<double>>& pts) {
  std::vector<std::vector<S>> out;
  for (const auto& x : pts) {
    out.emplace_back();
    for (double v : x) out.back().push_back(NumTraits<S>::from_double(v));
  }
  return out;
}

// max |R_a(x) - R_b(x)| over the points, and whether all outputs agree (exactly, or within rtol).
template <class S>
std::pair<bool, double> compare_on(const Params<S>& a, const Params<S>& b, const std::vector<std::vector<S>>& pts,
                                   double rtol) {
  bool equal = true;
  double gap = 0;
  for (const auto& x : pts) {
    auto ya = forward(a, x), yb = forward(b, x);
    for (std::size_t k = 0; k < ya.size(); ++k) {
      if (!NumTraits<S>::near(ya[k], yb[k], rtol)) equal = false;
      S diff = ya[k] - yb[k];
      gap = std::max(gap, NumTraits<S>::to_double(NumTraits<S>::abs(diff)));
    }
  }
  return {equal, gap};
}

}  // namespace detail

struct ValidationOptions {
  std::size_t trials = 500;
  double eps = 1e-3;
  std::uint64_t seed = 0;
  double rtol = 1e-12;  // float mode only
};

// (i) random rescalings near 1 must agree on F and be recognized as S-equivalent; (ii) random
// perturbations in the eps-ball that are not S-equivalent must differ somewhere on F. For networks
// with positive twins the twin collapse is tried as an extra perturbation.
template <class S>
ValidationReport validate_identification_set(const Params<S>& theta, const IdentificationSet& F,
                                             const ValidationOptions& opt = {}) {
  ValidationReport rep;
  const auto pts = detail::points_as<S>(F.points);
  const auto flat = theta.flatten();
  const Tolerance tol{0.0, NumTraits<S>::exact ? 0.0 : opt.rtol};

  std::vector<char> scale_fail(opt.trials, 0);
  parallel_for(opt.trials, [&](std::size_t t) {
    std::seed_seq ss{opt.seed, std::uint64_t{1}, static_cast<std::uint64_t>(t)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    auto lam = Rescaling<S>::identity(theta.arch());
    for (auto& layer : lam.lambda)
      for (auto& v : layer) v = NumTraits<S>::from_double(1.0 + u(rng));
    auto tp = rescale(theta, lam);
    auto [eq, gap] = detail::compare_on(theta, tp, pts, opt.rtol);
    auto w = check_scaling_equivalent(theta, tp, tol);
    scale_fail[t] = !eq || w.kind != Relation::S;
  });
  rep.scaling_trials = opt.trials;
  for (char f : scale_fail) rep.scaling_failures += f;

  struct Outcome {
    bool equivalent = false, falsified = false;
    double gap = 0;
    std::vector<double> flat;
  };
  std::vector<Outcome> out(opt.trials);
  parallel_for(opt.trials, [&](std::size_t t) {
    std::seed_seq ss{opt.seed, std::uint64_t{2}, static_cast<std::uint64_t>(t)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<S> f2 = flat;
    for (auto& v : f2) v += NumTraits<S>::from_double(opt.eps * u(rng));
    auto tp = Params<S>::unflatten(theta.arch(), f2);
    auto& o = out[t];
    if (check_scaling_equivalent(theta, tp, tol).kind == Relation::S) {
      o.equivalent = true;
      return;
    }
    auto [eq, gap] = detail::compare_on(theta, tp, pts, opt.rtol);
    o.gap = gap;
    if (eq) {
      o.falsified = true;
      for (const auto& v : f2) o.flat.push_back(NumTraits<S>::to_double(v));
    }
  });
  rep.perturbation_trials = opt.trials;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t].equivalent) {
      ++rep.perturbation_equivalent;
      continue;
    }
    rep.min_separation = std::min(rep.min_separation, out[t].gap);
    if (out[t].falsified) rep.falsifiers.push_back({"random-perturbation", t, out[t].flat});
  }

  auto tw = find_twins(theta);
  for (const auto& c : tw.classes)
    for (const auto& pr : c.pairs) {
      if (!(pr.ratio > 0)) continue;
      ++rep.structured_trials;
      S e = NumTraits<S>::from_double(opt.eps / 2);
      S big = NumTraits<S>::abs(pr.ratio) > S(1) ? NumTraits<S>::abs(pr.ratio) : S(1);
      e /= big;
      auto ex = positive_twin_collapse(theta, pr.first, pr.second, e);
      if (check_scaling_equivalent(theta, ex.theta_prime, tol).kind == Relation::S) continue;
      auto [eq, gap] = detail::compare_on(theta, ex.theta_prime, pts, opt.rtol);
      if (eq) {
        Falsifier f{"positive-twin-collapse", rep.structured_trials - 1, {}};
        for (const auto& v : ex.theta_prime.flatten()) f.theta_prime.push_back(NumTraits<S>::to_double(v));
        rep.falsifiers.push_back(std::move(f));
      }
    }
  return rep;
}

}  // namespace reluid
