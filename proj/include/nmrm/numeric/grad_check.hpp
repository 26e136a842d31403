#pragma once

#include <functional>

#include "nmrm/common.hpp"

namespace nmrm {

struct GradCheckReport {
  Real max_relative_error = 0.0;
  Eigen::Index worst_index = -1;
  Real analytic = 0.0;
  Real numeric = 0.0;
};

// Compares every entry of `analytic` with the central difference
// (L(p + eps e_i) - L(p - eps e_i)) / 2eps. Relative error is
// |a - n| / max(|a|, |n|, 1e-8). eps must lie in [1e-7, 1e-3].
GradCheckReport finite_diff_check(const Vec& params, const std::function<Real(const Vec&)>& loss,
                                  const Vec& analytic, Real eps);

}  // namespace nmrm
