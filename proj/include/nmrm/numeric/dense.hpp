#pragma once

#include <concepts>
#include <string>
#include <string_view>
#include <type_traits>

#include "nmrm/common.hpp"

namespace nmrm {

enum class Activation { identity, relu, leaky_relu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// Fully connected layer y = act(W x + b), optionally followed by inverted dropout.
struct DenseLayer {
  Mat weights;  // out x in
  Vec bias;     // out
  Activation activation = Activation::identity;
  Real leaky_slope = 0.01;
  Real dropout_rate = 0.0;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

// Uniform(+-sqrt(1/in)) weights, zero bias.
DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation act, Real dropout, Rng& rng);

// Activations recorded by a forward pass, needed for the backward pass.
struct DenseCache {
  Mat input;
  Mat pre;
  Mat mask;  // empty when dropout was not applied
};

// Batched forward: columns of `x` are independent inputs.
Mat dense_forward(const DenseLayer& layer, const Mat& x, bool training, Rng& rng,
                  DenseCache* cache = nullptr);

Vec dense_forward(const DenseLayer& layer, const Vec& x, bool training, Rng& rng);

// Accumulates dL/dW and dL/db into `grad` (same shape as `layer`), returns dL/dx.
Mat dense_backward(const DenseLayer& layer, const DenseCache& cache, const Mat& grad_out,
                   DenseLayer& grad);

template <class Layer, class Fn>
  requires std::same_as<std::remove_const_t<Layer>, DenseLayer>
void for_each_param(Layer& layer, const std::string& prefix, Fn&& fn) {
  fn(prefix + ".weight", layer.weights);
  fn(prefix + ".bias", layer.bias);
}

template <class Layer, class Fn>
  requires std::same_as<std::remove_const_t<Layer>, DenseLayer>
void for_each_param(Layer& layer, Fn&& fn) {
  for_each_param(layer, std::string("dense"), fn);
}

}  // namespace nmrm
