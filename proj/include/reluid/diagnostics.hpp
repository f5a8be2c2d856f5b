#pragma once
// Twin classes, irreducibility, and the classification of shallow networks.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "admissibility.hpp"
#include "equivalence.hpp"
#include "parallel.hpp"

namespace reluid {

template <class S>
struct TwinPair {
  NeuronId first, second;
  S ratio;  // z_second = ratio * z_first
};

template <class S>
struct TwinClass {
  std::size_t layer = 0;
  std::vector<std::size_t> members;  // ascending; members[0] is the reference
  std::vector<std::size_t> positive, negative;  // I_c (contains the reference) and J_c
  std::vector<int> signature;        // length N_layer, +1 on I_c, -1 on J_c
  std::vector<TwinPair<S>> pairs;    // every unordered pair of the class
  bool trivial() const { return members.size() == 1; }
};

template <class S>
struct TwinReport {
  std::vector<TwinClass<S>> classes;  // all hidden layers, layer order then reference order
  std::vector<NeuronId> zero_vectors; // neurons with (w, b) = 0, kept as singleton classes
  std::size_t positive_pairs = 0, negative_pairs = 0;

  bool has_twins() const { return positive_pairs + negative_pairs > 0; }
  std::vector<const TwinClass<S>*> nontrivial() const {
    std::vector<const TwinClass<S>*> out;
    for (const auto& c : classes)
      if (!c.trivial()) out.push_back(&c);
    return out;
  }
};

namespace detail {

template <class S>
bool collinear(const std::vector<S>& u, const std::vector<S>& v, double rtol) {
  if constexpr (NumTraits<S>::exact) {
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = i + 1; j < u.size(); ++j)
        if (u[i] * v[j] != u[j] * v[i]) return false;
    return true;
  } else {
    Eigen::MatrixXd m(2, u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      m(0, i) = u[i];
      m(1, i) = v[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    auto s = svd.singularValues();
    return s.size() < 2 || s(1) <= rtol * s(0);
  }
}

// v = ratio * u, u nonzero
template <class S>
S collinear_ratio(const std::vector<S>& u, const std::vector<S>& v) {
  if constexpr (NumTraits<S>::exact) {
    std::size_t k = 0;
    for (std::size_t m = 1; m < u.size(); ++m)
      if (NumTraits<S>::abs(u[m]) > NumTraits<S>::abs(u[k])) k = m;
    return v[k] / u[k];
  } else {
    double uu = 0, uv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uu += u[i] * u[i];
      uv += u[i] * v[i];
    }
    return uv / uu;
  }
}

template <class S>
bool all_zero(const std::vector<S>& u) {
  for (const auto& x : u)
    if (NumTraits<S>::sign(x) != 0) return false;
  return true;
}

}  // namespace detail

// Collinearity classes of the extended incoming vectors (w_{.->nu}, b_nu), per hidden layer.
template <class S>
TwinReport<S> find_twins(const Params<S>& p, double rtol = 1e-9) {
  TwinReport<S> rep;
  for (std::size_t l = 1; l < p.depth(); ++l) {
    const std::size_t n = p.arch().width(l);
    std::vector<std::vector<S>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = detail::extended_row(p, l, i);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<char> zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      zero[i] = detail::all_zero(rows[i]);
      if (zero[i]) rep.zero_vectors.push_back({l, i});
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!zero[i] && !zero[j] && find(i) != find(j) && detail::collinear(rows[i], rows[j], rtol))
          parent[std::max(find(i), find(j))] = std::min(find(i), find(j));
    for (std::size_t i = 0; i < n; ++i) {
      if (find(i) != i) continue;
      TwinClass<S> c;
      c.layer = l;
      c.signature.assign(n, 0);
      for (std::size_t j = i; j < n; ++j)
        if (find(j) == i) c.members.push_back(j);
      for (std::size_t j : c.members) {
        bool pos = j == i || (zero[i] ? true : NumTraits<S>::sign(detail::collinear_ratio(rows[i], rows[j])) > 0);
        (pos ? c.positive : c.negative).push_back(j);
        c.signature[j] = pos ? 1 : -1;
      }
      for (std::size_t x = 0; x < c.members.size(); ++x)
        for (std::size_t y = x + 1; y < c.members.size(); ++y) {
          auto a = c.members[x], b = c.members[y];
          S r = detail::collinear_ratio(rows[a], rows[b]);
          (NumTraits<S>::sign(r) > 0 ? rep.positive_pairs : rep.negative_pairs)++;
          c.pairs.push_back({{l, a}, {l, b}, r});
        }
      rep.classes.push_back(std::move(c));
    }
  }
  return rep;
}

enum class Verdict { yes, no, inconclusive };

struct IrreducibilityReport {
  Verdict irreducible = Verdict::yes;
  std::size_t witness_layer = 0;
  std::vector<std::size_t> witness;  // sorted neuron indices T
  std::size_t subsets_checked = 0;
  std::string note;
};

namespace detail {

inline bool lex_less_mask(std::uint64_t a, std::uint64_t b) {
  // compare the ascending index lists of two nonempty subsets
  while (a && b) {
    int ia = std::countr_zero(a), ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

}  // namespace detail

// Exhaustive check of W_{l+1} I_T W_l != 0 over nonempty T (full layer included), via Gray-code
// running sums of the rank-one matrices w_{nu->.} w_{.->nu}^T. Float mode treats entries with
// |x| <= rtol * (largest rank-one entry) as zero.
template <class S>
IrreducibilityReport is_irreducible(const Params<S>& p, std::size_t cap = 22, double rtol = 1e-12) {
  IrreducibilityReport rep;
  for (std::size_t l = 1; l < p.depth(); ++l)
    if (p.arch().width(l) > cap) {
      rep.irreducible = Verdict::inconclusive;
      rep.note = "layer " + std::to_string(l) + " has width " + std::to_string(p.arch().width(l)) +
                 " above the subset-enumeration cap " + std::to_string(cap);
      return rep;
    }
  for (std::size_t l = 1; l < p.depth(); ++l) {
    const auto& win = p.weights(l);
    const auto& wout = p.weights(l + 1);
    const std::size_t n = win.rows, K = wout.rows, D = win.cols, E = K * D;
    std::vector<std::vector<S>> M(n, std::vector<S>(E));
    double scale = 0;
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t d = 0; d < D; ++d) {
          M[v][k * D + d] = wout(k, v) * win(v, d);
          scale = std::max(scale, NumTraits<S>::to_double(NumTraits<S>::abs(M[v][k * D + d])));
        }
    const double atol = NumTraits<S>::exact ? 0.0 : rtol * scale;
    auto is_zero = [&](const S& x) { return NumTraits<S>::is_zero(x, atol); };

    // split the top bits into prefix blocks, Gray-code the low bits inside each block
    const std::size_t hi = n > 12 ? std::min<std::size_t>(4, n - 12) : 0;
    const std::size_t lo = n - hi;
    const std::size_t blocks = std::size_t{1} << hi;
    std::vector<std::uint64_t> best(blocks, 0);
    std::vector<std::size_t> checked(blocks, 0);
    parallel_for(blocks, [&](std::size_t blk) {
      std::vector<S> sum(E, S(0));
      std::uint64_t prefix = static_cast<std::uint64_t>(blk) << lo;
      for (std::size_t v = lo; v < n; ++v)
        if (prefix >> v & 1)
          for (std::size_t e = 0; e < E; ++e) sum[e] += M[v][e];
      std::size_t nonzero = 0;
      for (const auto& x : sum) nonzero += !is_zero(x);
      std::uint64_t mask = prefix, found = 0;
      auto consider = [&] {
        if (mask == 0) return;
        ++checked[blk];
        if (nonzero == 0 && (found == 0 || detail::lex_less_mask(mask, found))) found = mask;
      };
      consider();
      const std::uint64_t steps = std::uint64_t{1} << lo;
      for (std::uint64_t g = 1; g < steps; ++g) {
        std::size_t v = static_cast<std::size_t>(std::countr_zero(g));
        bool adding = !(mask >> v & 1);
        mask ^= std::uint64_t{1} << v;
        for (std::size_t e = 0; e < E; ++e) {
          bool was = !is_zero(sum[e]);
          if (adding) sum[e] += M[v][e];
          else sum[e] -= M[v][e];
          bool now = !is_zero(sum[e]);
          nonzero += static_cast<std::size_t>(now) - static_cast<std::size_t>(was);
        }
        consider();
      }
      best[blk] = found;
    });
    std::uint64_t found = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      rep.subsets_checked += checked[b];
      if (best[b] && (found == 0 || detail::lex_less_mask(best[b], found))) found = best[b];
    }
    if (found) {
      rep.irreducible = Verdict::no;
      rep.witness_layer = l;
      for (std::size_t v = 0; v < n; ++v)
        if (found >> v & 1) rep.witness.push_back(v);
      return rep;
    }
  }
  return rep;
}

enum class ShallowKind { identifiable_bounded, excluded_by_twins, excluded_by_reducibility, not_admissible };

inline const char* to_string(ShallowKind k) {
  switch (k) {
    case ShallowKind::identifiable_bounded: return "PS-identifiable-from-bounded-set";
    case ShallowKind::excluded_by_twins: return "excluded-by-twins";
    case ShallowKind::excluded_by_reducibility: return "excluded-by-reducibility";
    case ShallowKind::not_admissible: return "not-admissible";
  }
  return "?";
}

enum class Degeneracy { nondegenerate, degenerate, inconclusive };

inline const char* to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::nondegenerate: return "certified-nondegenerate";
    case Degeneracy::degenerate: return "certified-degenerate";
    case Degeneracy::inconclusive: return "inconclusive";
  }
  return "?";
}

// Sub-analysis for a shallow network whose only twins are one negative pair.
enum class PairBranch { independent_outgoing, zero_output_bias, dependent_outgoing };

inline const char* to_string(PairBranch b) {
  switch (b) {
    case PairBranch::independent_outgoing: return "i";
    case PairBranch::zero_output_bias: return "ii";
    case PairBranch::dependent_outgoing: return "iii";
  }
  return "?";
}

struct NegativePairAnalysis {
  std::size_t nu1 = 0, nu2 = 0;
  PairBranch branch = PairBranch::independent_outgoing;
  Degeneracy verdict = Degeneracy::inconclusive;
};

template <class S>
struct ShallowClassification {
  ShallowKind kind = ShallowKind::not_admissible;
  bool positive_twins = false, negative_twins = false, reducible = false;
  TwinReport<S> twins;
  IrreducibilityReport irreducibility;
  std::optional<NegativePairAnalysis> negative_pair;
};

// The single negative pair of a shallow network, if the twin structure is exactly that.
template <class S>
std::optional<std::pair<std::size_t, std::size_t>> single_negative_pair(const TwinReport<S>& t) {
  auto nt = t.nontrivial();
  if (nt.size() != 1 || nt[0]->members.size() != 2 || nt[0]->negative.size() != 1) return std::nullopt;
  return std::make_pair(nt[0]->members[0], nt[0]->members[1]);
}

template <class S>
NegativePairAnalysis analyze_negative_pair(const Params<S>& p, std::size_t nu1, std::size_t nu2,
                                           const ConstraintSet& c, double rtol = 1e-9) {
  NegativePairAnalysis a{nu1, nu2};
  const auto& w2 = p.weights(2);
  std::vector<S> v1(w2.rows), v2(w2.rows);
  for (std::size_t k = 0; k < w2.rows; ++k) {
    v1[k] = w2(k, nu1);
    v2[k] = w2(k, nu2);
  }
  if (!detail::collinear(v1, v2, rtol)) {
    a.branch = PairBranch::independent_outgoing;
    a.verdict = Degeneracy::nondegenerate;
  } else if (c.forces_zero_output_bias(p.arch())) {
    a.branch = PairBranch::zero_output_bias;
    a.verdict = Degeneracy::nondegenerate;
  } else {
    a.branch = PairBranch::dependent_outgoing;
    a.verdict = c.biases_free(p.arch()) ? Degeneracy::degenerate : Degeneracy::inconclusive;
  }
  return a;
}

template <class S>
ShallowClassification<S> classify_shallow(const Params<S>& p, const ConstraintSet& c = {}, double rtol = 1e-9) {
  if (p.depth() != 2) throw UnsupportedDepth("shallow classification needs L = 2");
  ShallowClassification<S> r;
  r.twins = find_twins(p, rtol);
  r.irreducibility = is_irreducible(p);
  r.positive_twins = r.twins.positive_pairs > 0;
  r.negative_twins = r.twins.negative_pairs > 0;
  r.reducible = r.irreducibility.irreducible == Verdict::no;
  if (auto np = single_negative_pair(r.twins)) r.negative_pair = analyze_negative_pair(p, np->first, np->second, c, rtol);
  if (!is_admissible(p).admissible) r.kind = ShallowKind::not_admissible;
  else if (r.twins.has_twins()) r.kind = ShallowKind::excluded_by_twins;
  else if (r.irreducibility.irreducible != Verdict::yes) r.kind = ShallowKind::excluded_by_reducibility;
  else r.kind = ShallowKind::identifiable_bounded;
  return r;
}

}  // namespace reluid
