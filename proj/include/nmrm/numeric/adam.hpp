#pragma once

#include <cstdint>

#include "nmrm/common.hpp"

namespace nmrm {

struct AdamConfig {
  Real learning_rate = 1e-3;
  Real weight_decay = 0.0;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Vec first_moment;
  Vec second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(Eigen::Index size, AdamConfig cfg)
      : config(cfg), first_moment(Vec::Zero(size)), second_moment(Vec::Zero(size)) {}
};

// One bias-corrected Adam step on a flat parameter vector. Weight decay is
// decoupled: params are scaled by (1 - lr * wd) before the moment update is
// applied. Throws NumericError on non-finite gradients.
void adam_update(Vec& params, const Vec& grads, AdamState& state);

}  // namespace nmrm
