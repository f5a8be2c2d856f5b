#pragma once
// Generators for the example networks and the twin / reducibility / bias collapse constructions.

#include <optional>
#include <string>
#include <vector>

#include "diagnostics.hpp"

namespace reluid {

enum class DomainKind { all_inputs, half_line, compact };

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::all_inputs: return "all-inputs";
    case DomainKind::half_line: return "half-line";
    case DomainKind::compact: return "compact";
  }
  return "?";
}

template <class S>
struct EqualityDomain {
  DomainKind kind = DomainKind::all_inputs;
  NeuronId neuron;  // half_line: region z_neuron(theta, x) >= -bound
  S bound = S(0);   // half_line: M; compact: every hidden |z_nu(theta, x)| > bound
};

enum class ClaimedRelation { not_S, not_PS };

inline const char* to_string(ClaimedRelation c) { return c == ClaimedRelation::not_S ? "not-S" : "not-PS"; }

template <class S>
struct ExamplePair {
  std::string name;
  Params<S> theta, theta_prime;
  EqualityDomain<S> domain;
  ClaimedRelation claimed = ClaimedRelation::not_PS;
};

// Membership of x in the pair's equality domain (evaluated with theta).
template <class S>
bool in_domain(const ExamplePair<S>& e, std::span<const S> x) {
  if (e.domain.kind == DomainKind::all_inputs) return true;
  ForwardTrace<S> t;
  forward(e.theta, x, &t);
  const S& bound = e.domain.bound;
  if (e.domain.kind == DomainKind::half_line)
    return t.pre[e.domain.neuron.layer][e.domain.neuron.index] >= -bound;
  for (std::size_t l = 1; l < e.theta.depth(); ++l)
    for (const auto& z : t.pre[l])
      if (!(NumTraits<S>::abs(z) > bound)) return false;
  return true;
}

namespace detail {

template <class S>
Params<S> shallow_1d(std::initializer_list<S> w, std::initializer_list<S> b, std::initializer_list<S> v, S c) {
  Params<S> p(Architecture({1, w.size(), 1}));
  std::size_t i = 0;
  for (const auto& x : w) p.weights(1)(i++, 0) = x;
  i = 0;
  for (const auto& x : b) p.bias(1)[i++] = x;
  i = 0;
  for (const auto& x : v) p.weights(2)(0, i++) = x;
  p.bias(2)[0] = c;
  return p;
}

}  // namespace detail

// ReLU(x - t) - ReLU(-(x - t)) + t, equal to x for every t.
template <class S = Rational>
Params<S> identity_family(const S& t) {
  return detail::shallow_1d<S>({S(1), S(-1)}, {S(-t), S(t)}, {S(1), S(-1)}, t);
}

template <class S = Rational>
ExamplePair<S> identity_pair(const S& t0, const S& t1) {
  return {"identity", identity_family<S>(t0), identity_family<S>(t1), {}, ClaimedRelation::not_PS};
}

// ReLU(-x) + ReLU(x - 1) written two ways with different output biases.
template <class S = Rational>
ExamplePair<S> nonlocal_pair() {
  ExamplePair<S> e;
  e.name = "nonlocal";
  e.theta = detail::shallow_1d<S>({S(-1), S(1)}, {S(0), S(-1)}, {S(1), S(1)}, S(0));
  e.theta_prime = detail::shallow_1d<S>({S(1), S(-1)}, {S(0), S(1)}, {S(1), S(1)}, S(-1));
  return e;
}

template <class S = Rational>
Params<S> abs_network() {
  return detail::shallow_1d<S>({S(1), S(-1)}, {S(0), S(0)}, {S(1), S(1)}, S(0));
}

// ReLU(x - t) + ReLU(-(x + t)) + t: equal to |x| for |x| >= t and to t inside.
template <class S = Rational>
Params<S> abs_shifted(const S& t) {
  return detail::shallow_1d<S>({S(1), S(-1)}, {S(-t), S(-t)}, {S(1), S(1)}, t);
}

template <class S = Rational>
ExamplePair<S> abs_shift_pair(const S& t) {
  ExamplePair<S> e{"abs-shifted", abs_network<S>(), abs_shifted<S>(t), {}, ClaimedRelation::not_PS};
  e.domain.kind = DomainKind::compact;
  e.domain.bound = t;
  return e;
}

namespace detail {

template <class S>
S twin_ratio(const Params<S>& p, NeuronId a, NeuronId b, double rtol) {
  if (a.layer != b.layer || a.layer == 0 || a.layer >= p.depth()) throw std::domain_error("twins must share a hidden layer");
  if (a.index == b.index) throw std::domain_error("twin neurons must differ");
  auto ra = extended_row(p, a.layer, a.index), rb = extended_row(p, b.layer, b.index);
  if (all_zero(ra) || !collinear(ra, rb, rtol)) throw std::domain_error("neurons are not twins");
  return collinear_ratio(ra, rb);
}

}  // namespace detail

// Moves weight between the outgoing columns of positive twins (z_nu2 = lambda z_nu1, lambda > 0):
// v'_1 = v_1 + lambda eps 1, v'_2 = v_2 - eps 1. The realization is unchanged everywhere.
template <class S>
ExamplePair<S> positive_twin_collapse(const Params<S>& theta, NeuronId nu1, NeuronId nu2, const S& eps,
                                      double rtol = 1e-9) {
  S lam = detail::twin_ratio(theta, nu1, nu2, rtol);
  if (!(lam > 0)) throw std::domain_error("positive_twin_collapse needs a positive twin pair");
  ExamplePair<S> e{"positive-twin-collapse", theta, theta, {}, ClaimedRelation::not_S};
  auto& w = e.theta_prime.weights(nu1.layer + 1);
  for (std::size_t k = 0; k < w.rows; ++k) {
    w(k, nu1.index) += lam * eps;
    w(k, nu2.index) -= eps;
  }
  return e;
}

// Negative twins (lambda < 0): nu2 gets the incoming row of nu1 and bias b_nu1 + M; outgoing columns
// become v1 + |lambda| v2 and -|lambda| v2; next-layer biases shift by |lambda| v2 M. Equal wherever
// z_nu1(theta, x) >= -M.
template <class S>
ExamplePair<S> negative_twin_collapse(const Params<S>& theta, NeuronId nu1, NeuronId nu2, const S& M,
                                      double rtol = 1e-9) {
  if (!(M > 0)) throw std::domain_error("M must be positive");
  S lam = detail::twin_ratio(theta, nu1, nu2, rtol);
  if (!(lam < 0)) throw std::domain_error("negative_twin_collapse needs a negative twin pair");
  const S beta = -lam;
  ExamplePair<S> e{"negative-twin-collapse", theta, theta, {}, ClaimedRelation::not_PS};
  auto& q = e.theta_prime;
  const std::size_t l = nu1.layer;
  auto& win = q.weights(l);
  for (std::size_t j = 0; j < win.cols; ++j) win(nu2.index, j) = win(nu1.index, j);
  q.bias(l)[nu2.index] = q.bias(l)[nu1.index] + M;
  auto& wout = q.weights(l + 1);
  for (std::size_t k = 0; k < wout.rows; ++k) {
    const S v2 = theta.weights(l + 1)(k, nu2.index);
    wout(k, nu1.index) += beta * v2;
    wout(k, nu2.index) = -beta * v2;
    q.bias(l + 1)[k] += beta * v2 * M;
  }
  e.domain.kind = DomainKind::half_line;
  e.domain.neuron = nu1;
  e.domain.bound = M;
  return e;
}

// Flips the neurons of T in layer l when W_{l+1} I_T W_l = 0, using ReLU(t) = t + ReLU(-t):
// W'_l = J_T W_l, b'_l = J_T b_l, W'_{l+1} = W_{l+1}, b'_{l+1} = W_{l+1} I_T b_l + b_{l+1}.
template <class S>
ExamplePair<S> reducibility_collapse(const Params<S>& theta, std::size_t l, const std::vector<std::size_t>& T,
                                     double rtol = 1e-12) {
  if (l == 0 || l >= theta.depth()) throw std::domain_error("layer must be hidden");
  const auto& W = theta.weights(l);
  const auto& V = theta.weights(l + 1);
  std::vector<char> in_T(W.rows, 0);
  for (auto t : T) {
    if (t >= W.rows) throw std::domain_error("subset index out of range");
    in_T[t] = 1;
  }
  if (T.empty()) throw std::domain_error("subset must be nonempty");
  double scale = 0;
  for (std::size_t k = 0; k < V.rows; ++k)
    for (std::size_t d = 0; d < W.cols; ++d) {
      S s(0);
      for (std::size_t i = 0; i < W.rows; ++i)
        if (in_T[i]) {
          s += V(k, i) * W(i, d);
          scale = std::max(scale, NumTraits<S>::to_double(NumTraits<S>::abs(V(k, i) * W(i, d))));
        }
      if (!NumTraits<S>::is_zero(s, rtol * scale)) throw std::domain_error("W_{l+1} I_T W_l is not zero for this subset");
    }
  ExamplePair<S> e{"reducibility-collapse", theta, theta, {}, ClaimedRelation::not_PS};
  auto& q = e.theta_prime;
  for (std::size_t i = 0; i < W.rows; ++i) {
    if (!in_T[i]) continue;
    for (std::size_t d = 0; d < W.cols; ++d) q.weights(l)(i, d) = -W(i, d);
    q.bias(l)[i] = -theta.bias(l)[i];
    for (std::size_t k = 0; k < V.rows; ++k) q.bias(l + 1)[k] += V(k, i) * theta.bias(l)[i];
  }
  return e;
}

// Bias-only shift of a shallow network whose only twins are one negative pair with dependent
// outgoing vectors v2 = alpha v1: b'_1 = b_1 + g eps, b'_2 = b_2 + g eps / alpha, b'_eta = b_eta - v1 g eps.
// g defaults to half of min(1, |alpha|, 1 / max|v1|).
template <class S>
ExamplePair<S> case2a_bias_witness(const Params<S>& theta, const S& eps, std::optional<S> gamma = std::nullopt,
                                   double rtol = 1e-9) {
  if (theta.depth() != 2) throw UnsupportedDepth("case2a witness needs L = 2");
  auto tw = find_twins(theta, rtol);
  auto np = single_negative_pair(tw);
  if (!np) throw std::domain_error("case2a witness needs exactly one negative twin pair and no other twins");
  const auto& V = theta.weights(2);
  std::vector<S> v1(V.rows), v2(V.rows);
  for (std::size_t k = 0; k < V.rows; ++k) {
    v1[k] = V(k, np->first);
    v2[k] = V(k, np->second);
  }
  if (detail::all_zero(v1) || !detail::collinear(v1, v2, rtol))
    throw std::domain_error("case2a witness needs linearly dependent outgoing vectors");
  const S alpha = detail::collinear_ratio(v1, v2);
  S g;
  if (gamma) {
    g = *gamma;
  } else {
    S vmax(0);
    for (const auto& x : v1) vmax = std::max<S>(vmax, NumTraits<S>::abs(x));
    g = S(1);
    if (NumTraits<S>::abs(alpha) < g) g = NumTraits<S>::abs(alpha);
    if (S(1) / vmax < g) g = S(1) / vmax;
    g /= 2;
  }
  ExamplePair<S> e{"case2a-bias-witness", theta, theta, {}, ClaimedRelation::not_S};
  auto& q = e.theta_prime;
  const S d1 = g * eps, d2 = g * eps / alpha;
  q.bias(1)[np->first] += d1;
  q.bias(1)[np->second] += d2;
  for (std::size_t k = 0; k < V.rows; ++k) q.bias(2)[k] -= v1[k] * d1;
  e.domain.kind = DomainKind::compact;
  e.domain.bound = NumTraits<S>::abs(d1) > NumTraits<S>::abs(d2) ? NumTraits<S>::abs(d1) : NumTraits<S>::abs(d2);
  return e;
}

}  // namespace reluid
