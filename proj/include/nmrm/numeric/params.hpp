#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nmrm/common.hpp"

namespace nmrm {

// Helpers over any type with a `for_each_param(model, fn)` overload, where
// `fn(name, tensor)` is called for every trainable tensor in a fixed order.
// The flat layout concatenates tensors in that order, each in Eigen's
// column-major storage order.

template <class Model>
std::size_t param_count(const Model& model) {
  std::size_t n = 0;
  for_each_param(model, [&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

template <class Model>
Vec flatten_params(const Model& model) {
  Vec flat(static_cast<Eigen::Index>(param_count(model)));
  Eigen::Index offset = 0;
  for_each_param(model, [&](const std::string&, const auto& t) {
    flat.segment(offset, t.size()) = Eigen::Map<const Vec>(t.data(), t.size());
    offset += t.size();
  });
  return flat;
}

// Same as flatten_params but reuses `flat`'s storage when the size matches.
template <class Model>
void flatten_params_into(const Model& model, Vec& flat) {
  const auto n = static_cast<Eigen::Index>(param_count(model));
  if (flat.size() != n) flat.resize(n);
  Eigen::Index offset = 0;
  for_each_param(model, [&](const std::string&, const auto& t) {
    flat.segment(offset, t.size()) = Eigen::Map<const Vec>(t.data(), t.size());
    offset += t.size();
  });
}

template <class Model>
void assign_params(Model& model, const Vec& flat) {
  require(static_cast<std::size_t>(flat.size()) == param_count(model),
          "assign_params: flat vector size does not match model");
  Eigen::Index offset = 0;
  for_each_param(model, [&](const std::string&, auto& t) {
    Eigen::Map<Vec>(t.data(), t.size()) = flat.segment(offset, t.size());
    offset += t.size();
  });
}

template <class Model>
void set_zero(Model& model) {
  for_each_param(model, [](const std::string&, auto& t) { t.setZero(); });
}

struct ParamSlot {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
};

template <class Model>
std::vector<ParamSlot> param_layout(const Model& model) {
  std::vector<ParamSlot> slots;
  Eigen::Index offset = 0;
  for_each_param(model, [&](const std::string& name, const auto& t) {
    slots.push_back({name, t.rows(), t.cols(), offset});
    offset += t.size();
  });
  return slots;
}

// Redraws every trainable entry from Uniform(-scale, scale).
template <class Model>
void randomise_params(Model& model, Rng& rng, Real scale) {
  std::uniform_real_distribution<Real> u(-scale, scale);
  for_each_param(model, [&](const std::string&, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  });
}

// Throws NumericError naming the first tensor that holds a NaN or Inf.
template <class Model>
void check_finite(const Model& model, const std::string& what) {
  for_each_param(model, [&](const std::string& name, const auto& t) {
    if (!t.allFinite()) throw NumericError(what + ": non-finite value in " + name);
  });
}

}  // namespace nmrm
