#pragma once

#include <cstdint>
#include <vector>

#include "evgrad/nn.hpp"
#include "evgrad/random.hpp"

namespace evgrad::testing {

inline Vector uniform_vector(RandomStream& rng, Eigen::Index n, double scale) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

inline Mlp random_net(RandomStream& rng, std::vector<std::size_t> sizes, Activation act, double scale = 1.0) {
  MlpShape shape{std::move(sizes), act};
  return Mlp(shape, uniform_vector(rng, static_cast<Eigen::Index>(shape.param_count()), scale));
}

// Single dense layer with the given weights (row-major, out x in) and biases.
inline Mlp affine_net(std::size_t in, std::size_t out, std::vector<double> weights, std::vector<double> biases) {
  ParamVector p(static_cast<Eigen::Index>(weights.size() + biases.size()));
  Eigen::Index i = 0;
  for (double w : weights) p[i++] = w;
  for (double b : biases) p[i++] = b;
  return Mlp(MlpShape{{in, out}, Activation::tanh}, p);
}

}  // namespace evgrad::testing
