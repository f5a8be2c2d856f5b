#pragma once

#include <vector>

#include "network.hpp"

namespace reluid {

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<NeuronId> zero_incoming;  // hidden neurons with w_{.->nu} = 0
  std::vector<NeuronId> zero_outgoing;  // hidden neurons with w_{nu->.} = 0
};

// Every hidden neuron needs a nonzero incoming and a nonzero outgoing weight vector.
template <class S>
AdmissibilityReport is_admissible(const Params<S>& p, double atol = 0.0) {
  AdmissibilityReport r;
  for (std::size_t l = 1; l < p.depth(); ++l) {
    const auto& in = p.weights(l);
    const auto& out = p.weights(l + 1);
    for (std::size_t i = 0; i < in.rows; ++i) {
      bool any_in = false, any_out = false;
      for (std::size_t j = 0; j < in.cols && !any_in; ++j) any_in = !NumTraits<S>::is_zero(in(i, j), atol);
      for (std::size_t k = 0; k < out.rows && !any_out; ++k) any_out = !NumTraits<S>::is_zero(out(k, i), atol);
      if (!any_in) r.zero_incoming.push_back({l, i});
      if (!any_out) r.zero_outgoing.push_back({l, i});
    }
  }
  r.admissible = r.zero_incoming.empty() && r.zero_outgoing.empty();
  return r;
}

}  // namespace reluid
