#pragma once

#include <cstdint>
#include <string>

#include "nmrm/mil/model.hpp"

namespace nmrm {

// Navigation topology (three FE layers, two hidden HN layers) at width 8, so
// the extended-precision finite differences stay fast.
ModelShape grad_suite_shape();

struct GradSuiteConfig {
  int draws = 20;
  int max_bag_length = 10;
  // Every tensor ~ Uniform(-b, b) with b = param_scale / sqrt(fan_in); biases
  // use their layer's fan-in.
  Real param_scale = 2.0;
  Real eps = 1e-6;
  Real tolerance = 1e-4;
  std::uint64_t seed = 1;
  ModelShape shape = grad_suite_shape();
};

struct GradSuiteResult {
  ModelKind kind;
  int draws = 0;
  int failures = 0;
  Real worst_error = 0.0;
  int worst_draw = -1;
  std::string worst_parameter;
  bool passed() const { return failures == 0; }
};

// Random (parameters, bag, target) draws; bag lengths are uniform in
// [1, max_bag_length] and features standard normal.
GradSuiteResult gradient_suite(ModelKind kind, const GradSuiteConfig& config);

}  // namespace nmrm
