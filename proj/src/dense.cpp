#include "nmrm/numeric/dense.hpp"

#include <cmath>

namespace nmrm {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "leaky_relu") return Activation::leaky_relu;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation act, Real dropout, Rng& rng) {
  require(in >= 1 && out >= 1, "make_dense: dimensions must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "make_dense: dropout must be in [0,1)");
  DenseLayer layer;
  layer.activation = act;
  layer.dropout_rate = dropout;
  layer.weights.resize(out, in);
  layer.bias = Vec::Zero(out);
  const Real bound = std::sqrt(1.0 / static_cast<Real>(in));
  std::uniform_real_distribution<Real> dist(-bound, bound);
  for (Eigen::Index c = 0; c < in; ++c)
    for (Eigen::Index r = 0; r < out; ++r) layer.weights(r, c) = dist(rng);
  return layer;
}

namespace {

void activate(const DenseLayer& layer, const Mat& pre, Mat& out) {
  switch (layer.activation) {
    case Activation::identity:
      out = pre;
      break;
    case Activation::relu:
      out = pre.cwiseMax(0.0);
      break;
    case Activation::leaky_relu: {
      const Real slope = layer.leaky_slope;
      out = pre.unaryExpr([slope](Real v) { return v > 0.0 ? v : slope * v; });
      break;
    }
  }
}

}  // namespace

Mat dense_forward(const DenseLayer& layer, const Mat& x, bool training, Rng& rng,
                  DenseCache* cache) {
  if (x.rows() != layer.in_dim())
    throw ContractError("dense_forward: input has " + std::to_string(x.rows()) +
                        " rows, layer expects " + std::to_string(layer.in_dim()));
  Mat pre = layer.weights * x;
  pre.colwise() += layer.bias;
  Mat out;
  activate(layer, pre, out);

  Mat mask;
  if (training && layer.dropout_rate > 0.0) {
    const Real keep_scale = 1.0 / (1.0 - layer.dropout_rate);
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    mask.resize(out.rows(), out.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      mask.data()[i] = u(rng) < layer.dropout_rate ? 0.0 : keep_scale;
    out.array() *= mask.array();
  }
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
    cache->mask = std::move(mask);
  }
  return out;
}

Vec dense_forward(const DenseLayer& layer, const Vec& x, bool training, Rng& rng) {
  Mat col = x;
  return dense_forward(layer, col, training, rng).col(0);
}

Mat dense_backward(const DenseLayer& layer, const DenseCache& cache, const Mat& grad_out,
                   DenseLayer& grad) {
  Mat dz = grad_out;
  if (cache.mask.size() > 0) dz.array() *= cache.mask.array();
  switch (layer.activation) {
    case Activation::identity:
      break;
    case Activation::relu:
      dz.array() *= (cache.pre.array() > 0.0).cast<Real>();
      break;
    case Activation::leaky_relu: {
      const Real slope = layer.leaky_slope;
      dz.array() *= cache.pre.array().unaryExpr([slope](Real v) { return v > 0.0 ? 1.0 : slope; });
      break;
    }
  }
  grad.weights.noalias() += dz * cache.input.transpose();
  grad.bias.noalias() += dz.rowwise().sum();
  return layer.weights.transpose() * dz;
}

}  // namespace nmrm
