#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace evgrad {

using Vector = Eigen::VectorXd;
// Flat parameter vector of a network: per layer, row-major weights then bias.
using ParamVector = Eigen::VectorXd;

enum class Activation { tanh, relu, mish };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct MlpShape {
  std::vector<std::size_t> layer_sizes;  // input dim, hidden dims..., output dim
  Activation activation = Activation::tanh;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t param_count() const;
  // Throws ConfigError unless there are >= 2 layers, all >= 1.
  void validate() const;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Intermediate values of one forward pass, reusable by backward and tangent sweeps.
struct ForwardTape {
  std::vector<Vector> layer_inputs;  // input of every layer
  std::vector<Vector> slopes;        // activation derivative at every hidden pre-activation
  Vector output;
};

// Dense feed-forward network. Hidden layers apply the activation, the output
// layer is linear.
class Mlp {
 public:
  Mlp(MlpShape shape, ParamVector params);

  const MlpShape& shape() const { return shape_; }
  const ParamVector& params() const { return params_; }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }

  Vector forward(const Vector& input) const;
  ForwardTape record(const Vector& input) const;

  // Gradient of dot(output_weights, forward(input)) with respect to params.
  ParamVector backward_weighted(const Vector& input, const Vector& output_weights) const;

  // grad += scale * backward_weighted(input, output_weights), without allocating a
  // parameter-sized temporary.
  void accumulate_backward(const Vector& input, const Vector& output_weights, double scale,
                           Eigen::Ref<ParamVector> grad) const;
  void accumulate_backward(const ForwardTape& tape, const Vector& output_weights, double scale,
                           Eigen::Ref<ParamVector> grad) const;

  // Forward-mode derivative of the output along a parameter-space direction:
  // returns J(input) * direction where J is d forward / d params.
  Vector output_tangent(const Vector& input, const ParamVector& direction) const;
  Vector output_tangent(const ForwardTape& tape, const ParamVector& direction) const;

  // Offsets of one layer's weight block and bias inside params().
  struct Layer {
    std::size_t in, out, weight_offset, bias_offset;
  };

 private:
  void check_input(const Vector& input) const;

  MlpShape shape_;
  ParamVector params_;
  std::vector<Layer> layers_;
};

// Glorot-uniform weights, zero biases. Same (shape, seed) gives identical params.
Mlp init_params(const MlpShape& shape, std::uint64_t seed);

// Central finite differences of f at p, coordinate by coordinate.
ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f, const ParamVector& p,
                             double step);

// ||a - b|| / max(||a||, ||b||, floor). The floor keeps all-zero gradients comparable.
double relative_error(const Vector& analytic, const Vector& numeric, double floor = 1e-8);

}  // namespace evgrad
