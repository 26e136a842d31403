#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmrm/bag.hpp"
#include "nmrm/numeric/dense.hpp"
#include "nmrm/numeric/grad_check.hpp"
#include "nmrm/numeric/lstm.hpp"

namespace nmrm {

// The four MIL reward-model architectures. All share a feature extractor (FE)
// applied per instance and a head network (HN):
//   instance_space_nn       r_t = HN(FE(x_t)),               g = sum r_t
//   embedding_space_lstm    g = HN(h_T); r_t = HN(h_t) - HN(h_{t-1}) post hoc
//   instance_space_lstm     r_t = HN(h_t),                    g = sum r_t
//   csc_instance_space_lstm r_t = HN([h_t; FE(x_t)]),         g = sum r_t
// where h_t is the LSTM state after consuming FE(x_1..x_t) from h_0 = c_0 = 0.
enum class ModelKind { instance_space_nn, embedding_space_lstm, instance_space_lstm, csc_instance_space_lstm };

inline constexpr std::array<ModelKind, 4> kAllModelKinds = {
    ModelKind::instance_space_nn, ModelKind::embedding_space_lstm, ModelKind::instance_space_lstm,
    ModelKind::csc_instance_space_lstm};

std::string_view to_string(ModelKind kind);
std::string_view short_name(ModelKind kind);  // nn | embedding | instance | csc
// Accepts the full names and the short aliases.
ModelKind parse_model_kind(std::string_view name);

struct ModelShape {
  std::vector<Eigen::Index> fe_widths;  // output width of each FE layer
  std::vector<Eigen::Index> hn_widths;  // hidden HN widths; a final 1-unit layer is appended
  Eigen::Index hidden_size = 2;
  Real dropout = 0.0;
  bool leaky_head = false;  // leaky ReLU on the final HN unit instead of identity
  Real head_leaky_slope = 1e-6;
};

// FE 2 -> 2, linear head, no dropout.
ModelShape toy_shape();
// FE -> 64 -> 32 -> 32, HN -> 32 -> 16 -> 1, dropout 0.1.
ModelShape nav_shape();

// Per-feature (x - mean) / std scaling; std is floored at 1e-8.
struct Normaliser {
  Vec mean;
  Vec stddev;

  static Normaliser identity(Eigen::Index dim);
  Mat apply(const Mat& raw) const;
  Vec apply(const Vec& raw) const;
};

// Statistics over every instance of the given bags.
Normaliser fit_normaliser(const std::vector<TrajectoryBag>& bags);
Normaliser fit_normaliser(const std::vector<TrajectoryBag>& bags, const std::vector<std::size_t>& indices);

struct MilModel {
  ModelKind kind = ModelKind::instance_space_nn;
  Eigen::Index feature_dim = 0;
  std::uint64_t seed = 0;
  ModelShape shape;
  std::vector<DenseLayer> fe;
  std::optional<LstmCell> lstm;
  std::vector<DenseLayer> hn;
  Normaliser normaliser;

  bool has_lstm() const { return lstm.has_value(); }
  Eigen::Index fe_output_dim() const { return fe.empty() ? feature_dim : fe.back().out_dim(); }
  Eigen::Index hidden_size() const { return lstm ? lstm->hidden_size() : 0; }
  Eigen::Index head_input_dim() const { return hn.front().in_dim(); }
};

MilModel build_model(ModelKind kind, Eigen::Index feature_dim, std::uint64_t seed,
                     const ModelShape& shape);

// Same structure with every trainable tensor zeroed (gradient accumulator).
MilModel zeros_like(const MilModel& model);

// Sets the dropout rate on every FE layer and every HN layer except the last.
void set_dropout(MilModel& model, Real rate);

template <class Model, class Fn>
  requires std::same_as<std::remove_const_t<Model>, MilModel>
void for_each_param(Model& model, Fn&& fn) {
  for (std::size_t i = 0; i < model.fe.size(); ++i) for_each_param(model.fe[i], "fe." + std::to_string(i), fn);
  if (model.lstm) for_each_param(*model.lstm, "lstm", fn);
  for (std::size_t i = 0; i < model.hn.size(); ++i) for_each_param(model.hn[i], "hn." + std::to_string(i), fn);
}

struct PredictionTrace {
  std::vector<Real> rewards;
  Mat hiddens;                        // H x T, empty for instance_space_nn
  Real bag_return = 0.0;
  std::vector<Real> partial_returns;  // embedding_space_lstm only
};

// Evaluation-mode prediction on raw (unnormalised) features, one column per step.
PredictionTrace predict(const MilModel& model, const Mat& features);
PredictionTrace predict(const MilModel& model, const TrajectoryBag& bag);

// Return prediction only, evaluation mode.
Real predict_return(const MilModel& model, const Mat& features);

// LSTM states h'_1..h'_T; throws ContractError for instance_space_nn.
Mat hidden_trace(const MilModel& model, const Mat& features);
Mat hidden_trace(const MilModel& model, const TrajectoryBag& bag);

struct GradientResult {
  Real loss = 0.0;
  Real prediction = 0.0;
  MilModel grad;
};

// dL/dtheta for L = (g' - target)^2 by full backpropagation through time.
// With training = true dropout masks are drawn from `rng`. Throws
// NumericError naming the parameter when the loss or a gradient is not finite.
GradientResult bptt_gradients(const MilModel& model, const Mat& features, Real target,
                              bool training = false, Rng* rng = nullptr);
GradientResult bptt_gradients(const MilModel& model, const TrajectoryBag& bag, Real target);

// Evaluation-mode squared return error.
Real return_loss(const MilModel& model, const Mat& features, Real target);

// Return prediction recomputed by a separate, unbatched forward pass in
// extended precision. Used as the loss oracle for finite differences.
long double reference_return(const MilModel& model, const Mat& features);

// Incremental evaluation-mode prediction, one step at a time, for driving an
// environment. Hidden values match predict() on the same prefix; embedding
// rewards are unrounded differences of consecutive partial returns.
class ModelStepper {
 public:
  explicit ModelStepper(const MilModel& model);

  void reset();
  // Feeds one raw state, returns r'_t.
  Real step(const Vec& raw_state);
  // h'_t after the last step (zeros after reset); empty for instance_space_nn.
  const Vec& hidden() const { return h_; }
  int steps() const { return t_; }
  const MilModel& model() const { return *model_; }

 private:
  const MilModel* model_;
  Vec h_, c_;
  Real previous_partial_ = 0.0;
  int t_ = 0;
};

// Worst relative error between bptt_gradients and central differences of the
// squared return error, over every parameter. The loss is evaluated with
// reference_return so roundoff does not swamp small gradient entries.
GradCheckReport finite_diff_check(const MilModel& model, const TrajectoryBag& bag, Real eps);
GradCheckReport finite_diff_check(const MilModel& model, const Mat& features, Real target, Real eps);

// Rounds partial returns onto a shared grid (spacing 2 ulp of the largest
// magnitude) and differences them, so the left-to-right sum of the returned
// rewards reproduces the last rounded partial return exactly.
std::vector<Real> telescoping_rewards(std::vector<Real>& partial_returns);

}  // namespace nmrm
