#pragma once
// Activation spaces Abar(theta) and A(theta), the structure of V(theta), and degeneracy certificates.

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "linalg.hpp"

namespace reluid {

struct SamplingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ActivationSpace {
  std::size_t ambient = 0;                     // |Q| + 1
  std::vector<std::vector<double>> basis;      // orthonormal basis of Abar
  std::size_t actdim = 0;
  std::vector<std::vector<double>> witnesses;  // inputs whose abar vectors generated the basis
  std::vector<std::vector<int>> witness_abar;
  std::string qualifier;                       // "closed form" or "sampled lower bound"
};

namespace detail {

inline void gram_schmidt_add(std::vector<std::vector<double>>& basis, std::vector<double> v) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) {
      double d = 0;
      for (std::size_t i = 0; i < v.size(); ++i) d += q[i] * v[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * q[i];
    }
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  basis.push_back(std::move(v));
}

struct SpaceBuilder {
  ActivationSpace space;
  linalg::ExactEchelon ech;
  explicit SpaceBuilder(std::size_t ambient) : ech(ambient) { space.ambient = ambient; }

  bool offer(const std::vector<double>& x, const std::vector<int>& abar) {
    if (!ech.add(abar)) return false;
    gram_schmidt_add(space.basis, std::vector<double>(abar.begin(), abar.end()));
    space.witnesses.push_back(x);
    space.witness_abar.push_back(abar);
    space.actdim = space.basis.size();
    return true;
  }
  bool full() const { return space.actdim == space.ambient; }
};

inline double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Pairs of points on either side of the hyperplane of each twin class of a shallow network,
// away from every other hyperplane.
inline std::vector<std::vector<double>> twin_probe_points(const Params<double>& p, const TwinReport<double>& twins,
                                                          std::mt19937_64& rng, double margin) {
  std::vector<std::vector<double>> out;
  const auto& W = p.weights(1);
  const auto& b = p.bias(1);
  const std::size_t d = W.cols, n = W.rows;
  std::normal_distribution<double> g(0.0, 1.0);
  for (const auto& c : twins.classes) {
    const std::size_t ref = c.members[0];
    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = W(ref, j);
    double wn = norm2(w);
    if (wn == 0) continue;
    std::vector<char> in_class(n, 0);
    for (auto m : c.members) in_class[m] = 1;
    std::vector<double> best;
    double best_gap = -1;
    for (int attempt = 0; attempt < 32; ++attempt) {
      const double radius = attempt % 3 == 0 ? 0.25 : attempt % 3 == 1 ? 1.0 : 4.0;
      std::vector<double> x0(d);
      for (std::size_t j = 0; j < d; ++j) x0[j] = g(rng) * radius;
      double proj = b[ref];
      for (std::size_t j = 0; j < d; ++j) proj += w[j] * x0[j];
      for (std::size_t j = 0; j < d; ++j) x0[j] -= proj * w[j] / (wn * wn);
      double gap = 1.0;
      bool first = true;
      for (std::size_t k = 0; k < n; ++k) {
        if (in_class[k]) continue;
        double z = b[k], rn = 0;
        for (std::size_t j = 0; j < d; ++j) {
          z += W(k, j) * x0[j];
          rn += W(k, j) * W(k, j);
        }
        double dist = rn > 0 ? std::fabs(z) / std::sqrt(rn) : (std::fabs(z) > 0 ? 1e300 : 0.0);
        gap = first ? dist : std::min(gap, dist);
        first = false;
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = x0;
      }
    }
    if (best_gap <= 0) continue;
    const double s = std::min(best_gap / 2, 1.0);
    for (double sign : {1.0, -1.0}) {
      std::vector<double> x = best;
      for (std::size_t j = 0; j < d; ++j) x[j] += sign * s * w[j] / wn;
      if (in_xcont(p, std::span<const double>(x), margin) == XCont::inside) out.push_back(std::move(x));
    }
  }
  return out;
}

}  // namespace detail

// Random sampling of Abar(theta): standard normal inputs at radii 1/4, 1, 4, kept when they pass
// the margin test; independence of the 0/1 abar vectors is decided exactly.
template <class S>
ActivationSpace sample_activation_space(const Params<S>& theta, std::size_t n_samples, std::uint64_t seed,
                                        double margin = 1e-9) {
  if (n_samples == 0) throw std::invalid_argument("n_samples must be at least 1");
  const Params<double> p = convert<double>(theta);
  PathIndex idx(p.arch());
  detail::SpaceBuilder sb(idx.q_size() + 1);
  sb.space.qualifier = p.depth() == 2 ? "sampled" : "sampled lower bound";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t d = p.arch().input_dim();
  if (p.depth() == 2) {
    auto tw = find_twins(p);
    for (auto& x : detail::twin_probe_points(p, tw, rng, margin))
      sb.offer(x, path_activation_vector(p, std::span<const double>(x)));
  }
  std::size_t accepted = 0;
  const double radii[3] = {0.25, 1.0, 4.0};
  for (std::size_t attempt = 0; attempt < 100 * n_samples && accepted < n_samples && !sb.full(); ++attempt) {
    std::vector<double> x(d);
    for (auto& v : x) v = g(rng) * radii[attempt % 3];
    if (in_xcont(p, std::span<const double>(x), margin) != XCont::inside) continue;
    ++accepted;
    sb.offer(x, path_activation_vector(p, std::span<const double>(x)));
  }
  if (sb.space.actdim == 0)
    throw SamplingFailure("no input passed the margin test after " + std::to_string(100 * n_samples) + " attempts");
  return sb.space;
}

// Spanning vectors (1_H, 2) and (sigma_c, 0) for every twin class c of a shallow network.
template <class S>
std::vector<std::vector<int>> shallow_spanning_vectors(const Params<S>& theta, double rtol = 1e-9) {
  const std::size_t h = theta.arch().width(1);
  std::vector<std::vector<int>> span;
  std::vector<int> ones(h + 1, 1);
  ones[h] = 2;
  span.push_back(ones);
  for (const auto& c : find_twins(theta, rtol).classes) {
    std::vector<int> s(c.signature);
    s.push_back(0);
    span.push_back(std::move(s));
  }
  return span;
}

template <class S>
ActivationSpace shallow_activation_space(const Params<S>& theta, double rtol = 1e-9) {
  if (theta.depth() != 2) throw UnsupportedDepth("closed-form activation space needs L = 2");
  if (!is_admissible(theta).admissible) throw std::domain_error("closed-form activation space needs an admissible network");
  auto span = shallow_spanning_vectors(theta, rtol);
  ActivationSpace s;
  s.ambient = theta.arch().width(1) + 1;
  s.qualifier = "closed form";
  linalg::ExactEchelon ech(s.ambient);
  for (const auto& v : span)
    if (ech.add(v)) detail::gram_schmidt_add(s.basis, std::vector<double>(v.begin(), v.end()));
  s.actdim = s.basis.size();
  return s;
}

struct VStructure {
  std::size_t dim_A = 0, dim_A_perp = 0, dim_Abar_perp = 0, dim_V = 0;
  std::vector<std::vector<double>> A_perp;     // in R^{Q_1}
  std::vector<std::vector<double>> Abar_perp;  // in R^{Q+1}
};

inline std::vector<std::vector<double>> to_rows(const linalg::Mat& m) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    out.emplace_back(m.rows());
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.back()[r] = m(r, c);
  }
  return out;
}

template <class S>
VStructure v_space_dimension(const Params<S>& theta, const ActivationSpace& space) {
  if (theta.depth() < 2) throw UnsupportedDepth("V(theta) needs at least one hidden layer");
  PathIndex idx(theta.arch());
  const std::size_t amb = idx.q_size() + 1, q1 = idx.q_count(1);
  if (space.ambient != amb) throw ShapeError("activation space ambient dimension does not match the network");
  linalg::Mat B(amb, space.basis.size()), QB(q1, space.basis.size());
  for (std::size_t c = 0; c < space.basis.size(); ++c)
    for (std::size_t r = 0; r < amb; ++r) {
      B(r, c) = space.basis[c][r];
      if (r < q1) QB(r, c) = space.basis[c][r];
    }
  VStructure v;
  auto Abar = linalg::orthonormal_basis(B);
  auto A = linalg::orthonormal_basis(QB);
  v.dim_A = static_cast<std::size_t>(A.cols());
  v.A_perp = to_rows(linalg::orthogonal_complement(A, q1));
  v.Abar_perp = to_rows(linalg::orthogonal_complement(Abar, amb));
  v.dim_A_perp = v.A_perp.size();
  v.dim_Abar_perp = v.Abar_perp.size();
  const auto& a = theta.arch();
  v.dim_V = a.output_dim() * a.input_dim() * v.dim_A_perp + a.output_dim() * v.dim_Abar_perp;
  return v;
}

// Basis of V(theta) embedded in path space: copies of A_perp in each Phi^i_eta column, copies of
// Abar_perp in each Phi^h_eta.
template <class S>
std::vector<std::vector<double>> v_space_path_basis(const Params<S>& theta, const VStructure& v) {
  PathIndex idx(theta.arch());
  const auto& a = theta.arch();
  std::vector<std::vector<double>> out;
  for (std::size_t eta = 0; eta < a.output_dim(); ++eta) {
    for (std::size_t mu = 0; mu < a.input_dim(); ++mu)
      for (const auto& f : v.A_perp) {
        std::vector<double> u(idx.p_size(), 0.0);
        for (std::size_t q = 0; q < f.size(); ++q) u[idx.input_block_index(eta, q, mu)] = f[q];
        out.push_back(std::move(u));
      }
    for (const auto& f : v.Abar_perp) {
      std::vector<double> u(idx.p_size(), 0.0);
      for (std::size_t j = 0; j < f.size(); ++j) u[idx.hidden_block_index(eta, j)] = f[j];
      out.push_back(std::move(u));
    }
  }
  return out;
}

struct NondegeneracyCertificate {
  Degeneracy verdict = Degeneracy::inconclusive;
  std::string reason;
  std::size_t dim_V = 0;
  bool dim_V_exact = false;  // false when Abar was only sampled
};

template <class S>
NondegeneracyCertificate nondegeneracy_certificate(const Params<S>& theta, const ConstraintSet& c = {},
                                                   std::size_t n_samples = 0, std::uint64_t seed = 0) {
  NondegeneracyCertificate cert;
  if (!is_admissible(theta).admissible) {
    cert.reason = "network is not admissible";
    return cert;
  }
  if (!c.contains(theta)) {
    cert.reason = "network violates the constraint set";
    return cert;
  }
  if (theta.depth() < 2) {
    cert.verdict = Degeneracy::nondegenerate;
    cert.dim_V_exact = true;
    cert.reason = "no hidden layer: the realization determines the parameters";
    return cert;
  }
  const bool shallow = theta.depth() == 2;
  ActivationSpace space;
  if (shallow) {
    space = shallow_activation_space(theta);
  } else {
    PathIndex idx(theta.arch());
    space = sample_activation_space(theta, n_samples ? n_samples : 200 * (idx.q_size() + 1), seed);
  }
  auto v = v_space_dimension(theta, space);
  cert.dim_V = v.dim_V;
  cert.dim_V_exact = shallow || v.dim_V == 0;
  if (v.dim_V == 0) {
    cert.verdict = Degeneracy::nondegenerate;
    cert.reason = "V(theta) = {0}";
    return cert;
  }
  if (!shallow) {
    cert.reason = "sampled activation space is not full; deep case undecided";
    return cert;
  }
  auto tw = find_twins(theta);
  if (auto np = single_negative_pair(tw)) {
    auto an = analyze_negative_pair(theta, np->first, np->second, c);
    cert.verdict = an.verdict;
    cert.reason = std::string("single negative twin pair, branch ") + to_string(an.branch);
    return cert;
  }
  if (theta.arch().output_dim() == 1 && v.dim_Abar_perp > 0 && c.biases_free(theta.arch())) {
    cert.verdict = Degeneracy::degenerate;
    cert.reason = "scalar shallow network with nontrivial Abar complement in the interior of the constraint set";
    return cert;
  }
  cert.reason = "no certificate applies";
  return cert;
}

// Bias-only perturbation of a scalar shallow network along z in the complement of Abar(theta).
template <class S>
Params<S> scalar_bias_degeneracy_witness(const Params<S>& theta, const std::vector<S>& z, const S& eps,
                                         double rtol = 1e-10) {
  if (theta.depth() != 2) throw UnsupportedDepth("bias witness needs L = 2");
  if (theta.arch().output_dim() != 1) throw std::domain_error("bias witness needs a scalar output");
  if (!is_admissible(theta).admissible) throw std::domain_error("bias witness needs an admissible network");
  if (eps < 0) throw std::domain_error("eps must be nonnegative");
  const std::size_t h = theta.arch().width(1);
  if (z.size() != h + 1) throw ShapeError("z must have length |H| + 1");
  double zn = 0;
  for (const auto& x : z) zn += NumTraits<S>::to_double(x) * NumTraits<S>::to_double(x);
  zn = std::sqrt(zn);
  for (const auto& s : shallow_spanning_vectors(theta)) {
    S dot(0);
    double sn = 0;
    for (std::size_t i = 0; i <= h; ++i) {
      dot += z[i] * S(s[i]);
      sn += double(s[i]) * s[i];
    }
    bool ok = NumTraits<S>::exact ? NumTraits<S>::sign(dot) == 0
                                  : std::fabs(NumTraits<S>::to_double(dot)) <= rtol * zn * std::sqrt(sn);
    if (!ok) throw std::domain_error("z is not orthogonal to the activation space (residual above tolerance)");
  }
  Params<S> q = theta;
  for (std::size_t i = 0; i < h; ++i) q.bias(1)[i] += eps * z[i] / theta.weights(2)(0, i);
  q.bias(2)[0] += eps * z[h];
  return q;
}

}  // namespace reluid
