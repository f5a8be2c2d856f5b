#pragma once
// Path embedding Phi(theta), the operator P, and the three realization formulas.

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "admissibility.hpp"
#include "paths.hpp"

namespace reluid {

struct UnsupportedDepth : std::domain_error {
  using std::domain_error::domain_error;
};

template <class S>
struct Embedding {
  PathIndex index;
  std::vector<S> phi;  // over P, flat order

  // Phi^i_eta: |Q_1| x N_0
  Matrix<S> input_block(std::size_t eta) const {
    Matrix<S> m(index.q_count(1), index.arch().input_dim());
    for (std::size_t q = 0; q < m.rows; ++q)
      for (std::size_t mu = 0; mu < m.cols; ++mu) m(q, mu) = phi[index.input_block_index(eta, q, mu)];
    return m;
  }
  // Phi^h_eta: |Q| + 1, last entry is the output bias
  std::vector<S> hidden_block(std::size_t eta) const {
    std::vector<S> v(index.q_size() + 1);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = phi[index.hidden_block_index(eta, j)];
    return v;
  }
  bool operator==(const Embedding& o) const { return index.arch() == o.index.arch() && phi == o.phi; }
};

namespace detail {

// Mixed-radix sweep over the paths of P_l. start(n) gives the factor for the first neuron,
// step(k, i, j, acc) folds in the edge j (layer k-1) -> i (layer k).
template <class T, class Start, class Step>
void sweep_from(const Architecture& a, std::size_t l, Start start, Step step, std::vector<T>& out) {
  std::vector<T> cur(a.width(l));
  for (std::size_t n = 0; n < cur.size(); ++n) cur[n] = start(n);
  for (std::size_t k = l + 1; k <= a.depth(); ++k) {
    const std::size_t nk = a.width(k), prev = a.width(k - 1);
    std::vector<T> nxt(cur.size() * nk);
    for (std::size_t r = 0; r < cur.size(); ++r)
      for (std::size_t i = 0; i < nk; ++i) nxt[r * nk + i] = step(k, i, r % prev, cur[r]);
    cur = std::move(nxt);
  }
  out.insert(out.end(), std::make_move_iterator(cur.begin()), std::make_move_iterator(cur.end()));
}

}  // namespace detail

template <class S>
Embedding<S> embed(const Params<S>& p, std::size_t budget = kDefaultPathBudget) {
  Embedding<S> e{PathIndex(p.arch(), budget), {}};
  const auto& a = p.arch();
  e.phi.reserve(e.index.p_size());
  auto step = [&](std::size_t k, std::size_t i, std::size_t j, const S& acc) -> S {
    return acc * p.weights(k)(i, j);
  };
  for (std::size_t l = 0; l <= a.depth(); ++l) {
    if (l == 0)
      detail::sweep_from<S>(a, 0, [](std::size_t) { return S(1); }, step, e.phi);
    else
      detail::sweep_from<S>(a, l, [&](std::size_t n) { return p.bias(l)[n]; }, step, e.phi);
  }
  return e;
}

// (Pu)_p = sum of u over the parameters of p (including the start bias of partial paths).
template <class S>
std::vector<S> apply_P(const Architecture& a, std::span<const S> u, std::size_t budget = kDefaultPathBudget) {
  if (u.size() != a.param_count()) throw ShapeError("apply_P: vector length differs from parameter count");
  PathIndex idx(a, budget);
  ParamLayout lay(a);
  std::vector<S> out;
  out.reserve(idx.p_size());
  auto step = [&](std::size_t k, std::size_t i, std::size_t j, const S& acc) -> S {
    return acc + u[lay.edge(k, i, j, a.width(k - 1))];
  };
  for (std::size_t l = 0; l <= a.depth(); ++l) {
    if (l == 0)
      detail::sweep_from<S>(a, 0, [](std::size_t) { return S(0); }, step, out);
    else
      detail::sweep_from<S>(a, l, [&](std::size_t n) { return u[lay.bias(l, n)]; }, step, out);
  }
  return out;
}

// Extended path activations: alpha_q for q in Q (product of statuses along q), then 1.
template <class S>
std::vector<int> path_activation_vector(const Params<S>& p, std::span<const S> x) {
  ForwardTrace<S> t;
  forward(p, x, &t);
  const auto& a = p.arch();
  std::vector<int> out;
  for (std::size_t l = 1; l < a.depth(); ++l) {
    std::vector<int> cur(t.status[l].begin(), t.status[l].end());
    for (std::size_t k = l + 1; k < a.depth(); ++k) {
      std::vector<int> nxt(cur.size() * a.width(k));
      for (std::size_t r = 0; r < cur.size(); ++r)
        for (std::size_t i = 0; i < a.width(k); ++i) nxt[r * a.width(k) + i] = cur[r] & t.status[k][i];
      cur = std::move(nxt);
    }
    out.insert(out.end(), cur.begin(), cur.end());
  }
  out.push_back(1);
  return out;
}

// Products of W_l I_{l-1} matrices with I_0 = Id, accumulated from the output side.
template <class S>
std::vector<S> algebraic_realization(const Params<S>& p, std::span<const S> x) {
  ForwardTrace<S> t;
  forward(p, x, &t);
  const std::size_t L = p.depth();
  Matrix<S> B = Matrix<S>::identity(p.arch().output_dim());
  std::vector<S> acc(p.arch().output_dim(), S(0));
  for (std::size_t l = L; l >= 1; --l) {
    auto Bb = matvec(B, std::span<const S>(p.bias(l)));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += Bb[i];
    Matrix<S> WI = p.weights(l);
    if (l >= 2)
      for (std::size_t j = 0; j < WI.cols; ++j)
        if (!t.status[l - 1][j])
          for (std::size_t i = 0; i < WI.rows; ++i) WI(i, j) = S(0);
    B = matmul(B, WI);
  }
  auto Bx = matvec(B, x);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += Bx[i];
  return acc;
}

// R_eta = <Q abar, Phi^i_eta x> + <abar, Phi^h_eta>, with abar computed at (theta, x).
template <class S>
std::vector<S> embedding_realization(const Params<S>& p, std::span<const S> x, const Embedding<S>* phi_override = nullptr) {
  if (p.depth() < 2) throw UnsupportedDepth("embedding realization needs L >= 2");
  if (x.size() != p.arch().input_dim()) throw ShapeError("input length mismatch");
  Embedding<S> own;
  if (!phi_override) own = embed(p);
  const Embedding<S>& e = phi_override ? *phi_override : own;
  if (!(e.index.arch() == p.arch())) throw ShapeError("embedding architecture differs from parameters");
  auto abar = path_activation_vector(p, x);
  const std::size_t q1 = e.index.q_count(1);
  std::vector<S> out(p.arch().output_dim(), S(0));
  for (std::size_t eta = 0; eta < out.size(); ++eta) {
    S acc(0);
    for (std::size_t q = 0; q < q1; ++q) {
      if (!abar[q]) continue;
      for (std::size_t mu = 0; mu < x.size(); ++mu) acc += e.phi[e.index.input_block_index(eta, q, mu)] * x[mu];
    }
    for (std::size_t j = 0; j < abar.size(); ++j)
      if (abar[j]) acc += e.phi[e.index.hidden_block_index(eta, j)];
    out[eta] = std::move(acc);
  }
  return out;
}

// Dense matrix of the linear map L_{theta,x}: R^P -> R^{N_L}, so that R_theta(x) = L Phi(theta).
template <class S>
Matrix<S> realization_operator(const Params<S>& p, std::span<const S> x, std::size_t budget = kDefaultPathBudget) {
  PathIndex idx(p.arch(), budget);
  const auto& a = p.arch();
  Matrix<S> Lm(a.output_dim(), idx.p_size());
  if (p.depth() == 1) {
    for (std::size_t eta = 0; eta < a.output_dim(); ++eta) {
      for (std::size_t mu = 0; mu < a.input_dim(); ++mu) Lm(eta, idx.encode_p({0, {mu, eta}})) = x[mu];
      Lm(eta, idx.encode_p({1, {eta}})) = S(1);
    }
    return Lm;
  }
  auto abar = path_activation_vector(p, x);
  for (std::size_t eta = 0; eta < a.output_dim(); ++eta) {
    for (std::size_t q = 0; q < idx.q_count(1); ++q)
      if (abar[q])
        for (std::size_t mu = 0; mu < a.input_dim(); ++mu) Lm(eta, idx.input_block_index(eta, q, mu)) = x[mu];
    for (std::size_t j = 0; j < abar.size(); ++j)
      if (abar[j]) Lm(eta, idx.hidden_block_index(eta, j)) = S(1);
  }
  return Lm;
}

struct SupportReport {
  bool admissible = false;
  bool inclusion_holds = false;  // covered set is contained in supp(theta)
  bool equality_holds = false;   // covered set equals supp(theta)
  std::vector<std::size_t> support;           // supp(theta), flat parameter indices
  std::vector<std::size_t> covered;           // params lying on a path with nonzero phi
  std::vector<std::size_t> uncovered_support; // supp(theta) minus covered
  std::vector<std::size_t> spurious;          // covered minus supp(theta); always empty in theory
};

template <class S>
SupportReport support_check(const Params<S>& p, std::size_t budget = kDefaultPathBudget) {
  SupportReport r;
  r.admissible = is_admissible(p).admissible;
  auto e = embed(p, budget);
  auto flat = p.flatten();
  std::vector<char> cov(flat.size(), 0);
  for (std::size_t k = 0; k < e.phi.size(); ++k) {
    if (NumTraits<S>::sign(e.phi[k]) == 0) continue;
    for (auto i : e.index.params_on(e.index.decode_p(k))) cov[i] = 1;
  }
  for (std::size_t i = 0; i < flat.size(); ++i) {
    bool in_supp = NumTraits<S>::sign(flat[i]) != 0;
    if (in_supp) r.support.push_back(i);
    if (cov[i]) r.covered.push_back(i);
    if (in_supp && !cov[i]) r.uncovered_support.push_back(i);
    if (!in_supp && cov[i]) r.spurious.push_back(i);
  }
  r.inclusion_holds = r.spurious.empty();
  r.equality_holds = r.inclusion_holds && r.uncovered_support.empty();
  return r;
}

}  // namespace reluid
