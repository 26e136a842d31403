#include "nmrm/numeric/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace nmrm {

GradCheckReport finite_diff_check(const Vec& params, const std::function<Real(const Vec&)>& loss,
                                  const Vec& analytic, Real eps) {
  require(eps >= 1e-7 && eps <= 1e-3, "finite_diff_check: eps must be in [1e-7, 1e-3]");
  require(params.size() == analytic.size(), "finite_diff_check: gradient size mismatch");
  GradCheckReport report;
  Vec probe = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const Real saved = probe[k];
    probe[k] = saved + eps;
    const Real plus = loss(probe);
    probe[k] = saved - eps;
    const Real minus = loss(probe);
    probe[k] = saved;
    const Real numeric = (plus - minus) / (2.0 * eps);
    const Real a = analytic[k];
    const Real denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const Real rel = std::abs(a - numeric) / denom;
    if (rel > report.max_relative_error || report.worst_index < 0) {
      report.max_relative_error = rel;
      report.worst_index = k;
      report.analytic = a;
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace nmrm
