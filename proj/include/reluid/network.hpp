#pragma once
// Architecture, parameters and forward evaluation of fully connected ReLU networks.
//
// Layers are numbered 0..L. Affine layer l (1 <= l <= L) maps layer l-1 to layer l
// through weights(l) (N_l x N_{l-1}) and bias(l) (N_l). Hidden layers are 1..L-1.

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace reluid {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class S>
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<S> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0)) {}

  S& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool operator==(const Matrix&) const = default;

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }
};

template <class S>
Matrix<S> matmul(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Matrix<S> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

template <class S>
std::vector<S> matvec(const Matrix<S>& a, std::span<const S> x) {
  if (a.cols != x.size()) throw ShapeError("matvec: dimension mismatch");
  std::vector<S> y(a.rows, S(0));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) y[i] += a(i, j) * x[j];
  return y;
}

struct Architecture {
  std::vector<std::size_t> widths;  // N_0..N_L

  Architecture() = default;
  explicit Architecture(std::vector<std::size_t> w) : widths(std::move(w)) { validate(); }

  void validate() const {
    if (widths.size() < 2) throw ShapeError("architecture needs at least an input and an output layer");
    for (auto n : widths)
      if (n == 0) throw ShapeError("layer widths must be positive");
  }
  std::size_t depth() const { return widths.size() - 1; }
  std::size_t width(std::size_t l) const { return widths.at(l); }
  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t hidden_count() const {
    std::size_t h = 0;
    for (std::size_t l = 1; l + 1 < widths.size(); ++l) h += widths[l];
    return h;
  }
  // |I|: all weights plus biases of layers 1..L
  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l < widths.size(); ++l) n += widths[l] * widths[l - 1] + widths[l];
    return n;
  }
  bool operator==(const Architecture&) const = default;
};

struct NeuronId {
  std::size_t layer = 0;
  std::size_t index = 0;
  bool operator==(const NeuronId&) const = default;
  auto operator<=>(const NeuronId&) const = default;
};

// Flat parameter layout: for l = 1..L, weights(l) row-major followed by bias(l).
struct ParamLayout {
  std::vector<std::size_t> weight_off, bias_off;  // indexed by l, entry 0 unused

  explicit ParamLayout(const Architecture& a) : weight_off(a.widths.size(), 0), bias_off(a.widths.size(), 0) {
    std::size_t off = 0;
    for (std::size_t l = 1; l < a.widths.size(); ++l) {
      weight_off[l] = off;
      off += a.widths[l] * a.widths[l - 1];
      bias_off[l] = off;
      off += a.widths[l];
    }
  }
  // edge from neuron j of layer l-1 to neuron i of layer l
  std::size_t edge(std::size_t l, std::size_t i, std::size_t j, std::size_t cols) const {
    return weight_off[l] + i * cols + j;
  }
  std::size_t bias(std::size_t l, std::size_t i) const { return bias_off[l] + i; }
};

template <class S>
class Params {
 public:
  Params() = default;
  explicit Params(Architecture arch) : arch_(std::move(arch)) {
    arch_.validate();
    for (std::size_t l = 1; l <= arch_.depth(); ++l) {
      w_.emplace_back(arch_.width(l), arch_.width(l - 1));
      b_.emplace_back(arch_.width(l), S(0));
    }
  }

  const Architecture& arch() const { return arch_; }
  std::size_t depth() const { return arch_.depth(); }

  Matrix<S>& weights(std::size_t l) { return w_.at(l - 1); }
  const Matrix<S>& weights(std::size_t l) const { return w_.at(l - 1); }
  std::vector<S>& bias(std::size_t l) { return b_.at(l - 1); }
  const std::vector<S>& bias(std::size_t l) const { return b_.at(l - 1); }

  std::vector<S> flatten() const {
    std::vector<S> out;
    out.reserve(arch_.param_count());
    for (std::size_t l = 1; l <= depth(); ++l) {
      out.insert(out.end(), weights(l).data.begin(), weights(l).data.end());
      out.insert(out.end(), bias(l).begin(), bias(l).end());
    }
    return out;
  }

  static Params unflatten(const Architecture& arch, std::span<const S> flat) {
    if (flat.size() != arch.param_count()) throw ShapeError("flat parameter vector has wrong length");
    Params p(arch);
    std::size_t k = 0;
    for (std::size_t l = 1; l <= p.depth(); ++l) {
      for (auto& v : p.weights(l).data) v = flat[k++];
      for (auto& v : p.bias(l)) v = flat[k++];
    }
    return p;
  }

  bool operator==(const Params& o) const { return arch_ == o.arch_ && w_ == o.w_ && b_ == o.b_; }

 private:
  Architecture arch_;
  std::vector<Matrix<S>> w_;
  std::vector<std::vector<S>> b_;
};

template <class To, class From>
Params<To> convert(const Params<From>& p) {
  Params<To> q(p.arch());
  for (std::size_t l = 1; l <= p.depth(); ++l) {
    auto& w = q.weights(l);
    for (std::size_t k = 0; k < w.data.size(); ++k) {
      if constexpr (std::is_same_v<From, To>) w.data[k] = p.weights(l).data[k];
      else if constexpr (std::is_same_v<From, double>) w.data[k] = NumTraits<To>::from_double(p.weights(l).data[k]);
      else w.data[k] = NumTraits<From>::to_double(p.weights(l).data[k]);
    }
    for (std::size_t k = 0; k < w.rows; ++k) {
      if constexpr (std::is_same_v<From, To>) q.bias(l)[k] = p.bias(l)[k];
      else if constexpr (std::is_same_v<From, double>) q.bias(l)[k] = NumTraits<To>::from_double(p.bias(l)[k]);
      else q.bias(l)[k] = NumTraits<From>::to_double(p.bias(l)[k]);
    }
  }
  return q;
}

// Parameter constraint sets. The sparsity mask marks entries of the flat layout that must be zero.
struct ConstraintSet {
  enum class Kind { unconstrained, zero_output_bias, zero_all_bias, sparsity_mask };
  Kind kind = Kind::unconstrained;
  std::vector<bool> zero_mask;

  static ConstraintSet unconstrained() { return {}; }
  static ConstraintSet zero_output_bias() { return {Kind::zero_output_bias, {}}; }
  static ConstraintSet zero_all_bias() { return {Kind::zero_all_bias, {}}; }
  static ConstraintSet sparsity(std::vector<bool> mask) { return {Kind::sparsity_mask, std::move(mask)}; }

  // true when every output bias is pinned to zero
  bool forces_zero_output_bias(const Architecture& a) const {
    if (kind == Kind::zero_output_bias || kind == Kind::zero_all_bias) return true;
    if (kind != Kind::sparsity_mask) return false;
    ParamLayout lay(a);
    for (std::size_t i = 0; i < a.output_dim(); ++i)
      if (!zero_mask.at(lay.bias(a.depth(), i))) return false;
    return true;
  }
  // true when any bias-only perturbation of a feasible point stays feasible
  bool biases_free(const Architecture& a) const {
    if (kind == Kind::unconstrained) return true;
    if (kind != Kind::sparsity_mask) return false;
    ParamLayout lay(a);
    for (std::size_t l = 1; l <= a.depth(); ++l)
      for (std::size_t i = 0; i < a.width(l); ++i)
        if (zero_mask.at(lay.bias(l, i))) return false;
    return true;
  }

  template <class S>
  std::vector<std::size_t> violations(const Params<S>& p) const {
    const auto& a = p.arch();
    std::vector<std::size_t> bad;
    ParamLayout lay(a);
    auto flat = p.flatten();
    auto check = [&](std::size_t idx) {
      if (NumTraits<S>::sign(flat[idx]) != 0) bad.push_back(idx);
    };
    switch (kind) {
      case Kind::unconstrained: break;
      case Kind::zero_output_bias:
        for (std::size_t i = 0; i < a.output_dim(); ++i) check(lay.bias(a.depth(), i));
        break;
      case Kind::zero_all_bias:
        for (std::size_t l = 1; l <= a.depth(); ++l)
          for (std::size_t i = 0; i < a.width(l); ++i) check(lay.bias(l, i));
        break;
      case Kind::sparsity_mask:
        if (zero_mask.size() != flat.size()) throw ShapeError("sparsity mask length differs from parameter count");
        for (std::size_t i = 0; i < flat.size(); ++i)
          if (zero_mask[i]) check(i);
        break;
    }
    return bad;
  }
  template <class S>
  bool contains(const Params<S>& p) const {
    return violations(p).empty();
  }
};

template <class S>
struct ForwardTrace {
  std::vector<std::vector<S>> pre;   // z_l, index l = 1..L (entry 0 empty)
  std::vector<std::vector<S>> post;  // y_l, index l = 0..L-1
  std::vector<std::vector<int>> status;  // a_l for hidden l (entries 0 and L empty)
};

template <class S>
std::vector<S> forward(const Params<S>& p, std::span<const S> x, ForwardTrace<S>* trace = nullptr) {
  const auto& a = p.arch();
  if (x.size() != a.input_dim())
    throw ShapeError("input has length " + std::to_string(x.size()) + ", expected " + std::to_string(a.input_dim()));
  const std::size_t L = a.depth();
  std::vector<S> y(x.begin(), x.end());
  if (trace) {
    trace->pre.assign(L + 1, {});
    trace->post.assign(L, {});
    trace->status.assign(L + 1, {});
    trace->post[0] = y;
  }
  for (std::size_t l = 1; l <= L; ++l) {
    const auto& w = p.weights(l);
    const auto& b = p.bias(l);
    std::vector<S> z(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
      S acc = b[i];
      for (std::size_t j = 0; j < w.cols; ++j) acc += w(i, j) * y[j];
      z[i] = std::move(acc);
    }
    if (l == L) {
      if (trace) trace->pre[l] = z;
      return z;
    }
    std::vector<int> st(z.size());
    y.assign(z.size(), S(0));
    for (std::size_t i = 0; i < z.size(); ++i) {
      st[i] = z[i] > 0 ? 1 : 0;
      if (st[i]) y[i] = z[i];
    }
    if (trace) {
      trace->pre[l] = std::move(z);
      trace->post[l] = y;
      trace->status[l] = std::move(st);
    }
  }
  return y;  // unreachable, L >= 1
}

template <class S>
std::vector<S> forward(const Params<S>& p, const std::vector<S>& x, ForwardTrace<S>* trace = nullptr) {
  return forward(p, std::span<const S>(x), trace);
}

// Statuses of all hidden neurons, layer by layer.
template <class S>
std::vector<int> activation_pattern(const Params<S>& p, std::span<const S> x) {
  ForwardTrace<S> t;
  forward(p, x, &t);
  std::vector<int> out;
  for (std::size_t l = 1; l < p.depth(); ++l) out.insert(out.end(), t.status[l].begin(), t.status[l].end());
  return out;
}

template <class S>
std::vector<int> activation_pattern(const Params<S>& p, const std::vector<S>& x) {
  return activation_pattern(p, std::span<const S>(x));
}

enum class XCont { inside, boundary_suspect };

// Sufficient test for membership in the region where all statuses are locally constant.
template <class S>
XCont in_xcont(const Params<S>& p, std::span<const S> x, double margin) {
  if (!(margin > 0)) throw std::domain_error("margin must be positive");
  ForwardTrace<S> t;
  forward(p, x, &t);
  const S m = NumTraits<S>::from_double(margin);
  for (std::size_t l = 1; l < p.depth(); ++l)
    for (const auto& z : t.pre[l])
      if (!(NumTraits<S>::abs(z) > m)) return XCont::boundary_suspect;
  return XCont::inside;
}

template <class S>
XCont in_xcont(const Params<S>& p, const std::vector<S>& x, double margin) {
  return in_xcont(p, std::span<const S>(x), margin);
}

// Hidden neurons in layer order.
inline std::vector<NeuronId> hidden_neurons(const Architecture& a) {
  std::vector<NeuronId> out;
  for (std::size_t l = 1; l < a.depth(); ++l)
    for (std::size_t i = 0; i < a.width(l); ++i) out.push_back({l, i});
  return out;
}

}  // namespace reluid
