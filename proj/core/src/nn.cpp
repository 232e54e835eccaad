#include "evgrad/nn.hpp"

#include <algorithm>
#include <cmath>

#include "evgrad/errors.hpp"
#include "evgrad/random.hpp"

namespace evgrad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Vector>;

// Value and slope of the activation at x.
struct Eval {
  double value, slope;
};

Eval activate(Activation a, double x) {
  switch (a) {
    case Activation::tanh: {
      const double t = std::tanh(x);
      return {t, 1.0 - t * t};
    }
    case Activation::relu:
      return x > 0 ? Eval{x, 1.0} : Eval{0.0, 0.0};
    case Activation::mish: {
      // tanh(softplus(x)) = (n^2 + 2n) / (n^2 + 2n + 2) with n = e^x; saturates to 1.
      if (x > 20.0) return {x, 1.0};
      const double n = std::exp(x);
      const double q = n * (n + 2.0);
      const double t = q / (q + 2.0);
      const double sig = n / (1.0 + n);
      return {x * t, t + x * (1.0 - t * t) * sig};
    }
  }
  return {x, 1.0};
}

std::vector<Mlp::Layer> layer_views(const MlpShape& shape) {
  std::vector<Mlp::Layer> views;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < shape.layer_sizes.size(); ++l) {
    const std::size_t in = shape.layer_sizes[l];
    const std::size_t out = shape.layer_sizes[l + 1];
    views.push_back({in, out, off, off + in * out});
    off += in * out + out;
  }
  return views;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::relu:
      return "relu";
    case Activation::mish:
      return "mish";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "mish") return Activation::mish;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected tanh, relu or mish)");
}

std::size_t MlpShape::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return n;
}

void MlpShape::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (auto n : layer_sizes)
    if (n < 1) throw ConfigError("layer sizes must be positive");
}

Mlp::Mlp(MlpShape shape, ParamVector params) : shape_(std::move(shape)), params_(std::move(params)) {
  shape_.validate();
  if (static_cast<std::size_t>(params_.size()) != shape_.param_count())
    throw ShapeError("parameter vector has " + std::to_string(params_.size()) + " entries, shape needs " +
                     std::to_string(shape_.param_count()));
  layers_ = layer_views(shape_);
}

void Mlp::check_input(const Vector& input) const {
  if (static_cast<std::size_t>(input.size()) != shape_.input_dim())
    throw ShapeError("network input has " + std::to_string(input.size()) + " entries, expected " +
                     std::to_string(shape_.input_dim()));
}

Vector Mlp::forward(const Vector& input) const {
  check_input(input);
  Vector a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& v = layers_[l];
    ConstMatrixMap w(params_.data() + v.weight_offset, v.out, v.in);
    ConstVectorMap b(params_.data() + v.bias_offset, v.out);
    Vector z = w * a + b;
    if (l + 1 == layers_.size()) return z;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = activate(shape_.activation, z[i]).value;
    a = std::move(z);
  }
  return a;
}

ForwardTape Mlp::record(const Vector& input) const {
  check_input(input);
  ForwardTape tape;
  tape.layer_inputs.reserve(layers_.size());
  tape.slopes.reserve(layers_.size() - 1);
  tape.layer_inputs.push_back(input);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& v = layers_[l];
    ConstMatrixMap w(params_.data() + v.weight_offset, v.out, v.in);
    ConstVectorMap b(params_.data() + v.bias_offset, v.out);
    Vector z = w * tape.layer_inputs.back() + b;
    if (l + 1 == layers_.size()) {
      tape.output = std::move(z);
      break;
    }
    Vector slope(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const Eval e = activate(shape_.activation, z[i]);
      z[i] = e.value;
      slope[i] = e.slope;
    }
    tape.slopes.push_back(std::move(slope));
    tape.layer_inputs.push_back(std::move(z));
  }
  return tape;
}

ParamVector Mlp::backward_weighted(const Vector& input, const Vector& output_weights) const {
  ParamVector grad = ParamVector::Zero(params_.size());
  accumulate_backward(input, output_weights, 1.0, grad);
  return grad;
}

void Mlp::accumulate_backward(const Vector& input, const Vector& output_weights, double scale,
                              Eigen::Ref<ParamVector> grad) const {
  accumulate_backward(record(input), output_weights, scale, grad);
}

void Mlp::accumulate_backward(const ForwardTape& tape, const Vector& output_weights, double scale,
                              Eigen::Ref<ParamVector> grad) const {
  if (static_cast<std::size_t>(output_weights.size()) != shape_.output_dim())
    throw ShapeError("output weights have " + std::to_string(output_weights.size()) + " entries, expected " +
                     std::to_string(shape_.output_dim()));
  if (grad.size() != params_.size()) throw ShapeError("gradient buffer does not match parameter count");
  if (tape.layer_inputs.size() != layers_.size()) throw ShapeError("forward tape belongs to another network");

  Vector delta = scale * output_weights;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& v = layers_[l];
    MatrixMap gw(grad.data() + v.weight_offset, v.out, v.in);
    gw.noalias() += delta * tape.layer_inputs[l].transpose();
    grad.segment(v.bias_offset, v.out) += delta;
    if (l == 0) break;
    ConstMatrixMap w(params_.data() + v.weight_offset, v.out, v.in);
    Vector back = w.transpose() * delta;
    delta = back.cwiseProduct(tape.slopes[l - 1]);
  }
}

Vector Mlp::output_tangent(const Vector& input, const ParamVector& direction) const {
  return output_tangent(record(input), direction);
}

Vector Mlp::output_tangent(const ForwardTape& tape, const ParamVector& direction) const {
  if (direction.size() != params_.size()) throw ShapeError("direction does not match parameter count");
  if (tape.layer_inputs.size() != layers_.size()) throw ShapeError("forward tape belongs to another network");
  Vector da;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& v = layers_[l];
    ConstMatrixMap dw(direction.data() + v.weight_offset, v.out, v.in);
    ConstVectorMap db(direction.data() + v.bias_offset, v.out);
    Vector dz = dw * tape.layer_inputs[l] + db;
    if (l > 0) {
      ConstMatrixMap w(params_.data() + v.weight_offset, v.out, v.in);
      dz.noalias() += w * da;
    }
    if (l + 1 == layers_.size()) return dz;
    da = dz.cwiseProduct(tape.slopes[l]);
  }
  return da;
}

Mlp init_params(const MlpShape& shape, std::uint64_t seed) {
  shape.validate();
  RandomStream rng(seed);
  ParamVector params = ParamVector::Zero(static_cast<Eigen::Index>(shape.param_count()));
  for (const auto& v : layer_views(shape)) {
    const double s = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
    for (std::size_t i = 0; i < v.in * v.out; ++i) params[v.weight_offset + i] = rng.uniform(-s, s);
  }
  return Mlp(shape, std::move(params));
}

ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f, const ParamVector& p,
                             double step) {
  if (!(step > 0)) throw ContractError("finite difference step must be positive");
  ParamVector grad(p.size());
  ParamVector probe = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    probe[i] = p[i] + step;
    const double up = f(probe);
    probe[i] = p[i] - step;
    const double down = f(probe);
    probe[i] = p[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(const Vector& analytic, const Vector& numeric, double floor) {
  const double scale = std::max({analytic.norm(), numeric.norm(), floor});
  return (analytic - numeric).norm() / scale;
}

}  // namespace evgrad
