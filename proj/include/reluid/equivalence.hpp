#pragma once
// Rescaling and permutation actions, S / PS equivalence checks with certificates,
// the map S_theta and its inverse, and a canonical representative of the S-class.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "admissibility.hpp"
#include "embedding.hpp"

namespace reluid {

// lambda[l-1][i] is the factor of neuron i in hidden layer l.
template <class S>
struct Rescaling {
  std::vector<std::vector<S>> lambda;

  static Rescaling identity(const Architecture& a) {
    Rescaling r;
    for (std::size_t l = 1; l < a.depth(); ++l) r.lambda.emplace_back(a.width(l), S(1));
    return r;
  }
  const S& at(std::size_t l, std::size_t i) const { return lambda.at(l - 1).at(i); }
  S& at(std::size_t l, std::size_t i) { return lambda.at(l - 1).at(i); }
  bool operator==(const Rescaling&) const = default;
};

// pi[l-1][i] is the new position of neuron i of hidden layer l.
struct Permutation {
  std::vector<std::vector<std::size_t>> pi;

  static Permutation identity(const Architecture& a) {
    Permutation p;
    for (std::size_t l = 1; l < a.depth(); ++l) {
      p.pi.emplace_back(a.width(l));
      for (std::size_t i = 0; i < a.width(l); ++i) p.pi.back()[i] = i;
    }
    return p;
  }
  bool is_identity() const {
    for (const auto& v : pi)
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != i) return false;
    return true;
  }
  Permutation inverse() const {
    Permutation q = *this;
    for (std::size_t l = 0; l < pi.size(); ++l)
      for (std::size_t i = 0; i < pi[l].size(); ++i) q.pi[l][pi[l][i]] = i;
    return q;
  }
  bool operator==(const Permutation&) const = default;
};

template <class S>
Params<S> rescale(const Params<S>& p, const Rescaling<S>& r) {
  const auto& a = p.arch();
  if (r.lambda.size() + 1 != a.depth()) throw ShapeError("rescaling has wrong number of hidden layers");
  for (std::size_t l = 1; l < a.depth(); ++l) {
    if (r.lambda[l - 1].size() != a.width(l)) throw ShapeError("rescaling layer width mismatch");
    for (const auto& v : r.lambda[l - 1])
      if (!(v > 0)) throw std::domain_error("rescaling factors must be strictly positive");
  }
  Params<S> q = p;
  for (std::size_t l = 1; l <= a.depth(); ++l) {
    auto& w = q.weights(l);
    auto& b = q.bias(l);
    for (std::size_t i = 0; i < w.rows; ++i) {
      if (l < a.depth()) {
        const S& li = r.at(l, i);
        b[i] *= li;
        for (std::size_t j = 0; j < w.cols; ++j) w(i, j) *= li;
      }
      if (l > 1)
        for (std::size_t j = 0; j < w.cols; ++j) w(i, j) /= r.at(l - 1, j);
    }
  }
  return q;
}

template <class S>
Params<S> permute(const Params<S>& p, const Permutation& perm) {
  const auto& a = p.arch();
  if (perm.pi.size() + 1 != a.depth()) throw ShapeError("permutation has wrong number of hidden layers");
  for (std::size_t l = 1; l < a.depth(); ++l) {
    const auto& v = perm.pi[l - 1];
    if (v.size() != a.width(l)) throw ShapeError("permutation length differs from layer width");
    std::vector<char> seen(v.size(), 0);
    for (auto k : v) {
      if (k >= v.size() || seen[k]) throw ShapeError("permutation is not a bijection");
      seen[k] = 1;
    }
  }
  auto map = [&](std::size_t l, std::size_t i) { return (l == 0 || l == a.depth()) ? i : perm.pi[l - 1][i]; };
  Params<S> q(a);
  for (std::size_t l = 1; l <= a.depth(); ++l) {
    const auto& w = p.weights(l);
    for (std::size_t i = 0; i < w.rows; ++i) {
      q.bias(l)[map(l, i)] = p.bias(l)[i];
      for (std::size_t j = 0; j < w.cols; ++j) q.weights(l)(map(l, i), map(l - 1, j)) = w(i, j);
    }
  }
  return q;
}

enum class Relation { S, PS, none, inconclusive, undecidable };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::S: return "S";
    case Relation::PS: return "PS";
    case Relation::none: return "none";
    case Relation::inconclusive: return "inconclusive";
    case Relation::undecidable: return "undecidable-by-this-test";
  }
  return "?";
}

template <class S>
struct EquivalenceWitness {
  Relation kind = Relation::none;
  std::optional<Permutation> permutation;
  std::optional<Rescaling<S>> rescaling;
  std::string reason;
  std::size_t candidates_tried = 0;
};

// Edges e = (layer k, row i, col j) forming a path from hidden neuron (l, i0) to an output,
// all with nonzero weight. Up to max_count paths in lexicographic DFS order.
struct EdgeRef {
  std::size_t layer, row, col;
};

template <class S>
std::vector<std::vector<EdgeRef>> supp_paths_to_output(const Params<S>& p, NeuronId nu, std::size_t max_count,
                                                       double atol = 0.0) {
  std::vector<std::vector<EdgeRef>> out;
  std::vector<EdgeRef> stack;
  auto dfs = [&](auto&& self, std::size_t l, std::size_t i) -> void {
    if (out.size() >= max_count) return;
    if (l == p.depth()) {
      out.push_back(stack);
      return;
    }
    const auto& w = p.weights(l + 1);
    for (std::size_t k = 0; k < w.rows; ++k) {
      if (NumTraits<S>::is_zero(w(k, i), atol)) continue;
      stack.push_back({l + 1, k, i});
      self(self, l + 1, k);
      stack.pop_back();
      if (out.size() >= max_count) return;
    }
  };
  dfs(dfs, nu.layer, nu.index);
  return out;
}

// (S_theta alpha)_nu = -sum of alpha over the edges of a support path from nu to the output.
// alpha is indexed by the flat parameter layout; beta is returned in hidden_neurons() order.
template <class S>
std::vector<double> S_theta(const Params<S>& p, std::span<const double> alpha, std::size_t path_choice = 0) {
  ParamLayout lay(p.arch());
  std::vector<double> beta;
  for (auto nu : hidden_neurons(p.arch())) {
    auto paths = supp_paths_to_output(p, nu, path_choice + 1);
    if (paths.empty()) throw std::domain_error("neuron without a support path to the output (not admissible)");
    const auto& path = paths[std::min(path_choice, paths.size() - 1)];
    double s = 0;
    for (const auto& e : path) s += alpha[lay.edge(e.layer, e.row, e.col, p.arch().width(e.layer - 1))];
    beta.push_back(-s);
  }
  return beta;
}

template <class S>
double S_theta_along(const Params<S>& p, std::span<const double> alpha, const std::vector<EdgeRef>& path) {
  ParamLayout lay(p.arch());
  double s = 0;
  for (const auto& e : path) s += alpha[lay.edge(e.layer, e.row, e.col, p.arch().width(e.layer - 1))];
  return -s;
}

// Inverse map: alpha_e = beta_nu - beta_mu on support edges mu -> nu (beta = 0 on input/output
// neurons), alpha of a nonzero hidden bias = beta_nu, zero elsewhere.
template <class S>
std::vector<double> S_theta_inverse(const Params<S>& p, std::span<const double> beta) {
  const auto& a = p.arch();
  if (beta.size() != a.hidden_count()) throw ShapeError("beta length differs from hidden neuron count");
  ParamLayout lay(a);
  std::vector<std::size_t> layer_off(a.depth() + 1, 0);
  for (std::size_t l = 2; l < a.depth(); ++l) layer_off[l] = layer_off[l - 1] + a.width(l - 1);
  auto b_of = [&](std::size_t l, std::size_t i) -> double {
    return (l == 0 || l == a.depth()) ? 0.0 : beta[layer_off[l] + i];
  };
  std::vector<double> alpha(a.param_count(), 0.0);
  for (std::size_t l = 1; l <= a.depth(); ++l) {
    const auto& w = p.weights(l);
    for (std::size_t i = 0; i < w.rows; ++i) {
      for (std::size_t j = 0; j < w.cols; ++j)
        if (NumTraits<S>::sign(w(i, j)) != 0) alpha[lay.edge(l, i, j, w.cols)] = b_of(l, i) - b_of(l - 1, j);
      if (l < a.depth() && NumTraits<S>::sign(p.bias(l)[i]) != 0) alpha[lay.bias(l, i)] = b_of(l, i);
    }
  }
  return alpha;
}

template <class S>
bool params_near(const Params<S>& a, const Params<S>& b, double rtol) {
  if (!(a.arch() == b.arch())) return false;
  auto fa = a.flatten(), fb = b.flatten();
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (!NumTraits<S>::near(fa[i], fb[i], rtol)) return false;
  return true;
}

// S-equivalence through the embedding criterion. The rescaling is recovered exactly as the ratio
// of weight products along one support path and then re-verified.
template <class S>
EquivalenceWitness<S> check_scaling_equivalent(const Params<S>& a, const Params<S>& b, Tolerance tol = {}) {
  EquivalenceWitness<S> w;
  if (!(a.arch() == b.arch())) {
    w.reason = "architectures differ";
    return w;
  }
  if (!is_admissible(a, tol.atol).admissible) {
    w.kind = Relation::undecidable;
    w.reason = "first network is not admissible";
    return w;
  }
  auto ea = embed(a), eb = embed(b);
  for (std::size_t k = 0; k < ea.phi.size(); ++k)
    if (!NumTraits<S>::near(ea.phi[k], eb.phi[k], tol.rtol)) {
      w.reason = "embeddings differ at " + ea.index.key(k);
      return w;
    }
  for (std::size_t l = 1; l <= a.depth(); ++l)
    for (std::size_t k = 0; k < a.weights(l).data.size(); ++k)
      if (NumTraits<S>::sign(a.weights(l).data[k]) != NumTraits<S>::sign(b.weights(l).data[k])) {
        w.reason = "edge weight signs differ in layer " + std::to_string(l);
        return w;
      }
  auto lam = Rescaling<S>::identity(a.arch());
  for (auto nu : hidden_neurons(a.arch())) {
    auto paths = supp_paths_to_output(a, nu, 1, tol.atol);
    S num(1), den(1);
    for (const auto& e : paths.at(0)) {
      num *= a.weights(e.layer)(e.row, e.col);
      den *= b.weights(e.layer)(e.row, e.col);
    }
    if (NumTraits<S>::sign(den) == 0) {
      w.reason = "second network has a zero weight on a support path";
      return w;
    }
    S ratio = num / den;
    if (!(ratio > 0)) {
      w.reason = "recovered scaling factor is not positive";
      return w;
    }
    lam.at(nu.layer, nu.index) = ratio;
  }
  if (!params_near(rescale(a, lam), b, tol.rtol)) {
    w.reason = "embedding criterion met but reconstruction failed";
    return w;
  }
  w.kind = Relation::S;
  w.rescaling = std::move(lam);
  return w;
}

struct PsOptions {
  Tolerance tol;
  std::size_t budget = 100000;  // matchings tried across all layers
};

namespace detail {

// Positive scale c with row_b = c * row_a (within tolerance), if any.
template <class S>
std::optional<S> positive_ratio(const std::vector<S>& ra, const std::vector<S>& rb, double rtol) {
  // pivot on the largest entry so float ratios stay well conditioned
  std::size_t k = 0;
  for (std::size_t m = 1; m < ra.size(); ++m)
    if (NumTraits<S>::abs(ra[m]) > NumTraits<S>::abs(ra[k])) k = m;
  if (NumTraits<S>::sign(ra[k]) == 0) return std::nullopt;
  if (NumTraits<S>::sign(ra[k]) != NumTraits<S>::sign(rb[k])) return std::nullopt;
  S c = rb[k] / ra[k];
  for (std::size_t m = 0; m < ra.size(); ++m) {
    S pred = c * ra[m];
    if (!NumTraits<S>::near(pred, rb[m], rtol)) return std::nullopt;
  }
  return c;
}

template <class S>
std::vector<S> extended_row(const Params<S>& p, std::size_t l, std::size_t i) {
  const auto& w = p.weights(l);
  std::vector<S> r(w.cols + 1);
  for (std::size_t j = 0; j < w.cols; ++j) r[j] = w(i, j);
  r[w.cols] = p.bias(l)[i];
  return r;
}

template <class S>
struct PsSearch {
  const Params<S>& target;
  PsOptions opt;
  std::size_t tried = 0;
  bool exhausted = false;
  Permutation perm;
  Rescaling<S> lam;

  // cur has layers < l already aligned with target
  bool layer(const Params<S>& cur, std::size_t l) {
    const auto& a = cur.arch();
    if (l == a.depth()) {
      if (++tried > opt.budget) {
        exhausted = true;
        return false;
      }
      return params_near(cur, target, opt.tol.rtol);
    }
    const std::size_t n = a.width(l);
    std::vector<std::vector<std::pair<std::size_t, S>>> compat(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto ri = extended_row(cur, l, i);
      for (std::size_t j = 0; j < n; ++j)
        if (auto c = positive_ratio(ri, extended_row(target, l, j), opt.tol.rtol)) compat[i].push_back({j, *c});
      if (compat[i].empty()) return false;
    }
    std::vector<std::size_t> assign(n);
    std::vector<S> scale(n);
    std::vector<char> used(n, 0);
    auto rec = [&](auto&& self, std::size_t i) -> bool {
      if (exhausted) return false;
      if (i == n) {
        if (++tried > opt.budget) {
          exhausted = true;
          return false;
        }
        Permutation pl = Permutation::identity(a);
        pl.pi[l - 1] = assign;
        auto rl = Rescaling<S>::identity(a);
        for (std::size_t k = 0; k < n; ++k) rl.at(l, assign[k]) = scale[k];
        Params<S> next = rescale(permute(cur, pl), rl);
        if (layer(next, l + 1)) {
          perm.pi[l - 1] = assign;
          for (std::size_t k = 0; k < n; ++k) lam.at(l, assign[k]) = scale[k];
          return true;
        }
        return false;
      }
      for (const auto& [j, c] : compat[i]) {
        if (used[j]) continue;
        used[j] = 1;
        assign[i] = j;
        scale[i] = c;
        if (self(self, i + 1)) return true;
        used[j] = 0;
        if (exhausted) return false;
      }
      return false;
    };
    return rec(rec, 0);
  }
};

}  // namespace detail

// Layer-by-layer search for (pi, lambda) with rescale(permute(a, pi), lambda) == b. Candidates at a
// layer are restricted to neurons whose extended incoming rows are positively collinear once the
// earlier layers are aligned.
template <class S>
EquivalenceWitness<S> check_ps_equivalent(const Params<S>& a, const Params<S>& b, PsOptions opt = {}) {
  EquivalenceWitness<S> w;
  if (!(a.arch() == b.arch())) {
    w.reason = "architectures differ";
    return w;
  }
  if (!is_admissible(a, opt.tol.atol).admissible) {
    w.kind = Relation::undecidable;
    w.reason = "first network is not admissible";
    return w;
  }
  detail::PsSearch<S> s{b, opt, 0, false, Permutation::identity(a.arch()), Rescaling<S>::identity(a.arch())};
  bool ok = s.layer(a, 1);
  w.candidates_tried = s.tried;
  if (!ok) {
    w.kind = s.exhausted ? Relation::inconclusive : Relation::none;
    w.reason = s.exhausted ? "search budget exhausted" : "no permutation-scaling aligns the networks";
    return w;
  }
  if (!params_near(rescale(permute(a, s.perm), s.lam), b, opt.tol.rtol)) {
    w.reason = "witness failed re-verification";
    return w;
  }
  w.kind = Relation::PS;
  w.permutation = std::move(s.perm);
  w.rescaling = std::move(s.lam);
  return w;
}

enum class CanonicalNorm { euclidean, l1 };

// Sweep hidden layers low to high; divide each neuron's extended incoming row by its norm and
// push the factor into the outgoing column. Exact mode defaults to the l1 norm (rational).
template <class S>
Params<S> canonical_form(const Params<S>& p,
                         CanonicalNorm norm = NumTraits<S>::exact ? CanonicalNorm::l1 : CanonicalNorm::euclidean) {
  if (!is_admissible(p).admissible) throw std::domain_error("canonical form needs an admissible network");
  if (norm == CanonicalNorm::euclidean && NumTraits<S>::exact)
    throw std::domain_error("euclidean canonical form is not rational; use the l1 norm in exact mode");
  Params<S> q = p;
  for (std::size_t l = 1; l < p.depth(); ++l) {
    auto& w = q.weights(l);
    auto& out = q.weights(l + 1);
    for (std::size_t i = 0; i < w.rows; ++i) {
      S n(0);
      if (norm == CanonicalNorm::l1) {
        for (std::size_t j = 0; j < w.cols; ++j) n += NumTraits<S>::abs(w(i, j));
        n += NumTraits<S>::abs(q.bias(l)[i]);
      } else {
        if constexpr (!NumTraits<S>::exact) {
          double s = q.bias(l)[i] * q.bias(l)[i];
          for (std::size_t j = 0; j < w.cols; ++j) s += w(i, j) * w(i, j);
          n = std::sqrt(s);
        }
      }
      for (std::size_t j = 0; j < w.cols; ++j) w(i, j) /= n;
      q.bias(l)[i] /= n;
      for (std::size_t k = 0; k < out.rows; ++k) out(k, i) *= n;
    }
  }
  return q;
}

}  // namespace reluid
