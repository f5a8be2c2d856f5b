// Small tour of the library on the absolute-value network and a planted recovery target.

#include <cstdio>

#include "reluid/reluid.hpp"

using namespace reluid;

int main() {
  auto abs_net = abs_network<Rational>();
  auto e = embed(abs_net);
  std::printf("embedding of |x|:");
  for (std::size_t i = 0; i < e.phi.size(); ++i) std::printf(" %s=%s", e.index.key(i).c_str(), e.phi[i].get_str().c_str());
  std::printf("\n");

  auto cls = classify_shallow(abs_net);
  std::printf("classification: %s\n", to_string(cls.kind));
  std::printf("degeneracy: %s\n", to_string(nondegeneracy_certificate(abs_net).verdict));

  auto lam = Rescaling<Rational>::identity(abs_net.arch());
  lam.at(1, 0) = Rational(3, 2);
  lam.at(1, 1) = Rational(1, 4);
  auto w = check_scaling_equivalent(abs_net, rescale(abs_net, lam));
  std::printf("rescaled copy: %s, lambda = (%s, %s)\n", to_string(w.kind), w.rescaling->at(1, 0).get_str().c_str(),
              w.rescaling->at(1, 1).get_str().c_str());

  Params<double> plant(Architecture({2, 3, 1}));
  const double W[3][2] = {{0.8, 0.6}, {-0.6, 0.8}, {0.0, -1.0}}, b[3] = {0.2, -0.5, 0.3}, v[3] = {1.5, -0.7, 0.9};
  for (std::size_t j = 0; j < 3; ++j) {
    plant.weights(1)(j, 0) = W[j][0];
    plant.weights(1)(j, 1) = W[j][1];
    plant.bias(1)[j] = b[j];
    plant.weights(2)(0, j) = v[j];
  }
  plant.bias(2)[0] = -0.1;
  auto model = recover_shallow(network_oracle(plant, default_query_budget(2)));
  PsOptions po;
  po.tol.rtol = 1e-8;
  std::printf("recovered %zu units with %zu queries, max error %.2e, relation to plant: %s\n", model.units.size(),
              model.queries, model.verify_error, model.params ? to_string(check_ps_equivalent(plant, *model.params, po).kind) : "n/a");
  return 0;
}
