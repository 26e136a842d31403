#include "nmrm/mil/grad_suite.hpp"

#include <cmath>

#include "nmrm/numeric/params.hpp"

namespace nmrm {

ModelShape grad_suite_shape() {
  ModelShape s = nav_shape();
  s.fe_widths = {8, 8, 8};
  s.hn_widths = {8, 4};
  return s;
}

namespace {

void randomise_fan_in(MilModel& m, Rng& rng, Real scale) {
  Eigen::Index fan_in = 1;
  for_each_param(m, [&](const std::string&, auto& t) {
    if (t.cols() > 1) fan_in = t.cols();
    std::uniform_real_distribution<Real> u(-scale / std::sqrt(static_cast<Real>(fan_in)),
                                           scale / std::sqrt(static_cast<Real>(fan_in)));
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  });
}

}  // namespace

GradSuiteResult gradient_suite(ModelKind kind, const GradSuiteConfig& cfg) {
  require(cfg.draws >= 1 && cfg.max_bag_length >= 1, "gradient_suite: need at least one draw and one step");
  GradSuiteResult out;
  out.kind = kind;
  out.draws = cfg.draws;
  for (int d = 0; d < cfg.draws; ++d) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(d)));
    MilModel m = build_model(kind, 2, rng(), cfg.shape);
    randomise_fan_in(m, rng, cfg.param_scale);
    std::uniform_int_distribution<int> len(1, cfg.max_bag_length);
    std::normal_distribution<Real> normal(0.0, 1.0);
    Mat x(2, len(rng));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    const Real target = normal(rng);
    const GradCheckReport r = finite_diff_check(m, x, target, cfg.eps);
    if (r.max_relative_error > cfg.tolerance) ++out.failures;
    if (r.max_relative_error > out.worst_error || out.worst_draw < 0) {
      out.worst_error = r.max_relative_error;
      out.worst_draw = d;
      for (const auto& slot : param_layout(m))
        if (r.worst_index >= slot.offset && r.worst_index < slot.offset + slot.rows * slot.cols)
          out.worst_parameter = slot.name;
    }
  }
  return out;
}

}  // namespace nmrm
