#pragma once
// Path sets P_l (neuron of layer l to an output) and Q_l (hidden neuron of layer l to layer L-1).
//
// Paths of one start layer are ranked in mixed radix with the earliest layer most significant.
// Flat order over P is P_0, P_1, ..., P_L; flat order over Q is Q_1, ..., Q_{L-1}.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "network.hpp"

namespace reluid {

struct PathBudgetExceeded : std::runtime_error {
  double count;
  PathBudgetExceeded(double c, double budget)
      : std::runtime_error("path enumeration refused: " + std::to_string(static_cast<long double>(c)) +
                           " paths exceed the budget of " + std::to_string(static_cast<long double>(budget))),
        count(c) {}
};

inline constexpr std::size_t kDefaultPathBudget = 10'000'000;

struct Path {
  std::size_t start = 0;           // start layer
  std::vector<std::size_t> nodes;  // neuron indices for layers start..end
};

class PathIndex {
 public:
  PathIndex() = default;
  PathIndex(const Architecture& arch, std::size_t budget = kDefaultPathBudget) : arch_(arch) {
    arch_.validate();
    const std::size_t L = arch_.depth();
    double total = 0;
    p_count_.assign(L + 1, 1);
    for (std::size_t l = 0; l <= L; ++l) {
      double c = 1;
      for (std::size_t k = l; k <= L; ++k) c *= static_cast<double>(arch_.width(k));
      total += c;
    }
    if (total > static_cast<double>(budget)) throw PathBudgetExceeded(total, static_cast<double>(budget));
    p_offset_.assign(L + 2, 0);
    for (std::size_t l = 0; l <= L; ++l) {
      std::size_t c = 1;
      for (std::size_t k = l; k <= L; ++k) c *= arch_.width(k);
      p_count_[l] = c;
      p_offset_[l + 1] = p_offset_[l] + c;
    }
    q_count_.assign(L + 1, 0);
    q_offset_.assign(L + 1, 0);
    std::size_t off = 0;
    for (std::size_t l = 1; l < L; ++l) {
      std::size_t c = 1;
      for (std::size_t k = l; k < L; ++k) c *= arch_.width(k);
      q_count_[l] = c;
      q_offset_[l] = off;
      off += c;
    }
    q_total_ = off;
  }

  const Architecture& arch() const { return arch_; }
  std::size_t depth() const { return arch_.depth(); }
  std::size_t p_size() const { return p_offset_.back(); }
  std::size_t p_count(std::size_t l) const { return p_count_.at(l); }
  std::size_t p_offset(std::size_t l) const { return p_offset_.at(l); }
  std::size_t q_size() const { return q_total_; }
  std::size_t q_count(std::size_t l) const { return (l >= 1 && l < depth()) ? q_count_[l] : 0; }
  std::size_t q_offset(std::size_t l) const { return q_offset_.at(l); }

  // start layer of a flat P index
  std::size_t p_layer(std::size_t flat) const {
    std::size_t l = 0;
    while (flat >= p_offset_[l + 1]) ++l;
    return l;
  }
  Path decode_p(std::size_t flat) const {
    Path p;
    p.start = p_layer(flat);
    std::size_t r = flat - p_offset_[p.start];
    p.nodes.assign(depth() - p.start + 1, 0);
    for (std::size_t k = depth() + 1; k-- > p.start;) {
      p.nodes[k - p.start] = r % arch_.width(k);
      r /= arch_.width(k);
    }
    return p;
  }
  std::size_t encode_p(const Path& p) const {
    std::size_t r = 0;
    for (std::size_t k = p.start; k <= depth(); ++k) r = r * arch_.width(k) + p.nodes.at(k - p.start);
    return p_offset_.at(p.start) + r;
  }
  std::size_t q_layer(std::size_t flat) const {
    for (std::size_t l = 1; l < depth(); ++l)
      if (flat < q_offset_[l] + q_count_[l]) return l;
    throw std::out_of_range("Q index out of range");
  }
  Path decode_q(std::size_t flat) const {
    Path p;
    p.start = q_layer(flat);
    std::size_t r = flat - q_offset_[p.start];
    p.nodes.assign(depth() - p.start, 0);
    for (std::size_t k = depth(); k-- > p.start;) {
      p.nodes[k - p.start] = r % arch_.width(k);
      r /= arch_.width(k);
    }
    return p;
  }

  // Block index maps. input block of output eta: entry (q in Q_1, mu in N_0) -> flat P_0 index.
  std::size_t input_block_index(std::size_t eta, std::size_t q1, std::size_t mu) const {
    require_hidden();
    return p_offset_[0] + (mu * q_count_[1] + q1) * arch_.output_dim() + eta;
  }
  // hidden block of output eta: entry j < |Q| (a path of Q) or j = |Q| (the output bias).
  std::size_t hidden_block_index(std::size_t eta, std::size_t j) const {
    require_hidden();
    if (j == q_total_) return p_offset_[depth()] + eta;
    std::size_t l = q_layer(j);
    return p_offset_[l] + (j - q_offset_[l]) * arch_.output_dim() + eta;
  }

  // Parameter indices (flat layout) on path p; the start-neuron bias is included for partial paths.
  std::vector<std::size_t> params_on(const Path& p) const {
    ParamLayout lay(arch_);
    std::vector<std::size_t> out;
    if (p.start >= 1) out.push_back(lay.bias(p.start, p.nodes[0]));
    for (std::size_t k = p.start + 1; k <= depth(); ++k)
      out.push_back(lay.edge(k, p.nodes[k - p.start], p.nodes[k - 1 - p.start], arch_.width(k - 1)));
    return out;
  }

  std::string neuron_name(std::size_t layer, std::size_t i) const {
    if (layer == 0) return "μ" + std::to_string(i);
    if (layer == depth()) return "η" + std::to_string(i);
    return "ν" + std::to_string(layer) + "." + std::to_string(i);
  }
  std::string key(std::size_t flat) const {
    Path p = decode_p(flat);
    std::string s = p.start == 0 ? "" : "b:";
    for (std::size_t k = p.start; k <= depth(); ++k) {
      if (k != p.start) s += "->";
      s += neuron_name(k, p.nodes[k - p.start]);
    }
    return s;
  }

 private:
  void require_hidden() const {
    if (depth() < 2) throw std::domain_error("block reshape needs at least one hidden layer");
  }

  Architecture arch_;
  std::vector<std::size_t> p_count_, p_offset_, q_count_, q_offset_;
  std::size_t q_total_ = 0;
};

inline PathIndex enumerate_paths(const Architecture& arch, std::size_t budget = kDefaultPathBudget) {
  return PathIndex(arch, budget);
}

}  // namespace reluid
