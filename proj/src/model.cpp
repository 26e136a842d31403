#include "nmrm/mil/model.hpp"

#include <algorithm>
#include <cmath>

#include "nmrm/numeric/params.hpp"

namespace nmrm {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::instance_space_nn: return "instance_space_nn";
    case ModelKind::embedding_space_lstm: return "embedding_space_lstm";
    case ModelKind::instance_space_lstm: return "instance_space_lstm";
    case ModelKind::csc_instance_space_lstm: return "csc_instance_space_lstm";
  }
  return "instance_space_nn";
}

std::string_view short_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::instance_space_nn: return "nn";
    case ModelKind::embedding_space_lstm: return "embedding";
    case ModelKind::instance_space_lstm: return "instance";
    case ModelKind::csc_instance_space_lstm: return "csc";
  }
  return "nn";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : kAllModelKinds)
    if (name == to_string(k) || name == short_name(k)) return k;
  throw ContractError("unknown model kind '" + std::string(name) +
                      "' (expected nn, embedding, instance or csc)");
}

ModelShape toy_shape() {
  ModelShape s;
  s.fe_widths = {2};
  s.hidden_size = 2;
  return s;
}

ModelShape nav_shape() {
  ModelShape s;
  s.fe_widths = {64, 32, 32};
  s.hn_widths = {32, 16};
  s.hidden_size = 2;
  s.dropout = 0.1;
  return s;
}

Normaliser Normaliser::identity(Eigen::Index dim) {
  return {Vec::Zero(dim), Vec::Ones(dim)};
}

Mat Normaliser::apply(const Mat& raw) const {
  if (raw.rows() != mean.size())
    throw ContractError("normaliser: features have " + std::to_string(raw.rows()) +
                        " dimensions, expected " + std::to_string(mean.size()));
  Mat out = raw;
  out.colwise() -= mean;
  out.array().colwise() /= stddev.array();
  return out;
}

Vec Normaliser::apply(const Vec& raw) const {
  return apply(Mat(raw)).col(0);
}

Normaliser fit_normaliser(const std::vector<TrajectoryBag>& bags, const std::vector<std::size_t>& indices) {
  require(!indices.empty(), "fit_normaliser: empty training split");
  const Eigen::Index dim = bags.at(indices.front()).feature_dim();
  require(dim >= 1, "fit_normaliser: bags have no features");
  Vec sum = Vec::Zero(dim);
  std::size_t count = 0;
  for (std::size_t i : indices) {
    const Mat x = feature_matrix(bags.at(i));
    require(x.rows() == dim, "fit_normaliser: bags disagree on feature dimension");
    sum += x.rowwise().sum();
    count += static_cast<std::size_t>(x.cols());
  }
  require(count > 0, "fit_normaliser: training bags are empty");
  const Vec mean = sum / static_cast<Real>(count);
  Vec sq = Vec::Zero(dim);
  for (std::size_t i : indices) {
    Mat x = feature_matrix(bags[i]);
    x.colwise() -= mean;
    sq += x.array().square().matrix().rowwise().sum();
  }
  Vec stddev = (sq / static_cast<Real>(count)).cwiseSqrt().cwiseMax(1e-8);
  return {mean, stddev};
}

Normaliser fit_normaliser(const std::vector<TrajectoryBag>& bags) {
  std::vector<std::size_t> all(bags.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return fit_normaliser(bags, all);
}

MilModel build_model(ModelKind kind, Eigen::Index feature_dim, std::uint64_t seed,
                     const ModelShape& shape) {
  require(feature_dim >= 1, "build_model: feature_dim must be at least 1");
  require(shape.hidden_size >= 1, "build_model: hidden size must be at least 1");
  MilModel m;
  m.kind = kind;
  m.feature_dim = feature_dim;
  m.seed = seed;
  m.shape = shape;
  m.normaliser = Normaliser::identity(feature_dim);
  Rng rng(seed);

  Eigen::Index width = feature_dim;
  for (Eigen::Index w : shape.fe_widths) {
    m.fe.push_back(make_dense(width, w, Activation::relu, shape.dropout, rng));
    width = w;
  }
  const Eigen::Index fe_out = width;
  Eigen::Index head_in = fe_out;
  if (kind != ModelKind::instance_space_nn) {
    m.lstm = make_lstm(fe_out, shape.hidden_size, rng);
    head_in = shape.hidden_size;
    if (kind == ModelKind::csc_instance_space_lstm) head_in += fe_out;
  }
  width = head_in;
  for (Eigen::Index w : shape.hn_widths) {
    m.hn.push_back(make_dense(width, w, Activation::relu, shape.dropout, rng));
    width = w;
  }
  DenseLayer head = make_dense(width, 1, shape.leaky_head ? Activation::leaky_relu : Activation::identity,
                               0.0, rng);
  head.leaky_slope = shape.head_leaky_slope;
  m.hn.push_back(std::move(head));
  return m;
}

MilModel zeros_like(const MilModel& model) {
  MilModel z = model;
  set_zero(z);
  return z;
}

void set_dropout(MilModel& model, Real rate) {
  require(rate >= 0.0 && rate < 1.0, "set_dropout: rate must be in [0,1)");
  model.shape.dropout = rate;
  for (auto& l : model.fe) l.dropout_rate = rate;
  for (std::size_t i = 0; i + 1 < model.hn.size(); ++i) model.hn[i].dropout_rate = rate;
}

namespace {

struct ForwardPass {
  std::vector<DenseCache> fe_cache;
  LstmSequenceCache lstm_cache;
  std::vector<DenseCache> hn_cache;
  Mat features;  // FE output, F x T
  Mat hidden;    // H x T
  Mat head_in;
  Mat head_out;  // 1 x T, or 1 x 1 for the embedding training path
};

Mat run_layers(const std::vector<DenseLayer>& layers, Mat x, bool training, Rng& rng,
               std::vector<DenseCache>* caches) {
  if (caches) caches->resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i)
    x = dense_forward(layers[i], x, training, rng, caches ? &(*caches)[i] : nullptr);
  return x;
}

Mat back_layers(const std::vector<DenseLayer>& layers, const std::vector<DenseCache>& caches, Mat grad,
                std::vector<DenseLayer>& grads) {
  for (std::size_t i = layers.size(); i-- > 0;) grad = dense_backward(layers[i], caches[i], grad, grads[i]);
  return grad;
}

// With all_steps = false the embedding head only sees h_T (the training path).
ForwardPass forward(const MilModel& m, const Mat& features, bool training, Rng& rng, bool keep_cache,
                    bool all_steps) {
  require(features.cols() >= 1, "predict: bag is empty");
  if (features.rows() != m.feature_dim)
    throw ContractError("predict: bag features have " + std::to_string(features.rows()) +
                        " dimensions, model expects " + std::to_string(m.feature_dim));
  ForwardPass p;
  const Mat x = m.normaliser.apply(features);
  p.features = run_layers(m.fe, x, training, rng, keep_cache ? &p.fe_cache : nullptr);
  if (m.lstm) p.hidden = lstm_forward_sequence(*m.lstm, p.features, keep_cache ? &p.lstm_cache : nullptr);

  switch (m.kind) {
    case ModelKind::instance_space_nn:
      p.head_in = p.features;
      break;
    case ModelKind::embedding_space_lstm:
      p.head_in = all_steps ? p.hidden : Mat(p.hidden.rightCols(1));
      break;
    case ModelKind::instance_space_lstm:
      p.head_in = p.hidden;
      break;
    case ModelKind::csc_instance_space_lstm:
      p.head_in.resize(p.hidden.rows() + p.features.rows(), p.features.cols());
      p.head_in << p.hidden, p.features;
      break;
  }
  p.head_out = run_layers(m.hn, p.head_in, training, rng, keep_cache ? &p.hn_cache : nullptr);
  return p;
}

Real left_to_right_sum(const Mat& row) {
  Real s = 0.0;
  for (Eigen::Index t = 0; t < row.cols(); ++t) s += row(0, t);
  return s;
}

Real prediction_of(const MilModel& m, const ForwardPass& p) {
  if (m.kind == ModelKind::embedding_space_lstm) return p.head_out(0, p.head_out.cols() - 1);
  return left_to_right_sum(p.head_out);
}

}  // namespace

std::vector<Real> telescoping_rewards(std::vector<Real>& partial_returns) {
  Real largest = 0.0;
  for (Real g : partial_returns) {
    if (!std::isfinite(g)) throw NumericError("telescoping_rewards: non-finite partial return");
    largest = std::max(largest, std::abs(g));
  }
  std::vector<Real> rewards(partial_returns.size(), 0.0);
  if (largest == 0.0) return rewards;
  // Every grid point up to 4x the largest magnitude is an integer multiple of
  // `spacing` below 2^53, so differences and their running sums are exact.
  const Real spacing = std::ldexp(1.0, std::ilogb(largest) - 51);
  Real previous = 0.0;
  for (std::size_t t = 0; t < partial_returns.size(); ++t) {
    Real& g = partial_returns[t];
    g = std::nearbyint(g / spacing) * spacing;
    rewards[t] = g - previous;
    previous = g;
  }
  return rewards;
}

PredictionTrace predict(const MilModel& model, const Mat& features) {
  Rng unused(0);
  const ForwardPass p = forward(model, features, false, unused, false, true);
  PredictionTrace trace;
  trace.hiddens = p.hidden;
  const auto steps = static_cast<std::size_t>(p.head_out.cols());
  std::vector<Real> head(steps);
  for (std::size_t t = 0; t < steps; ++t) head[t] = p.head_out(0, static_cast<Eigen::Index>(t));

  if (model.kind == ModelKind::embedding_space_lstm) {
    trace.partial_returns = head;
    trace.rewards = telescoping_rewards(trace.partial_returns);
    trace.bag_return = trace.partial_returns.back();
  } else {
    trace.rewards = head;
    for (Real r : trace.rewards) trace.bag_return += r;
  }
  if (!std::isfinite(trace.bag_return)) throw NumericError("predict: non-finite return prediction");
  return trace;
}

PredictionTrace predict(const MilModel& model, const TrajectoryBag& bag) {
  return predict(model, feature_matrix(bag));
}

Real predict_return(const MilModel& model, const Mat& features) {
  Rng unused(0);
  return prediction_of(model, forward(model, features, false, unused, false, false));
}

ModelStepper::ModelStepper(const MilModel& model) : model_(&model) { reset(); }

void ModelStepper::reset() {
  h_ = Vec::Zero(model_->hidden_size());
  c_ = Vec::Zero(model_->hidden_size());
  previous_partial_ = 0.0;
  t_ = 0;
}

Real ModelStepper::step(const Vec& raw_state) {
  const MilModel& m = *model_;
  if (raw_state.size() != m.feature_dim)
    throw ContractError("model step: state has " + std::to_string(raw_state.size()) +
                        " dimensions, model expects " + std::to_string(m.feature_dim));
  Rng unused(0);
  Mat f = run_layers(m.fe, Mat(m.normaliser.apply(raw_state)), false, unused, nullptr);
  if (m.lstm) {
    LstmState next = lstm_step(*m.lstm, f.col(0), h_, c_);
    h_ = std::move(next.h);
    c_ = std::move(next.c);
  }
  Mat head_in;
  switch (m.kind) {
    case ModelKind::instance_space_nn: head_in = f; break;
    case ModelKind::embedding_space_lstm:
    case ModelKind::instance_space_lstm: head_in = h_; break;
    case ModelKind::csc_instance_space_lstm:
      head_in.resize(h_.size() + f.rows(), 1);
      head_in << h_, f;
      break;
  }
  Real out = run_layers(m.hn, head_in, false, unused, nullptr)(0, 0);
  ++t_;
  if (m.kind == ModelKind::embedding_space_lstm) {
    const Real r = out - previous_partial_;
    previous_partial_ = out;
    out = r;
  }
  if (!std::isfinite(out)) throw NumericError("model step: non-finite reward");
  return out;
}

Mat hidden_trace(const MilModel& model, const Mat& features) {
  if (!model.lstm)
    throw ContractError("hidden_trace: " + std::string(to_string(model.kind)) + " has no LSTM");
  Rng unused(0);
  require(features.cols() >= 1, "hidden_trace: bag is empty");
  const Mat x = model.normaliser.apply(features);
  return lstm_forward_sequence(*model.lstm, run_layers(model.fe, x, false, unused, nullptr));
}

Mat hidden_trace(const MilModel& model, const TrajectoryBag& bag) {
  return hidden_trace(model, feature_matrix(bag));
}

Real return_loss(const MilModel& model, const Mat& features, Real target) {
  const Real e = predict_return(model, features) - target;
  return e * e;
}

GradientResult bptt_gradients(const MilModel& model, const Mat& features, Real target, bool training,
                              Rng* rng) {
  require(!training || rng != nullptr, "bptt_gradients: training mode needs an rng");
  Rng unused(0);
  Rng& r = rng ? *rng : unused;
  const ForwardPass p = forward(model, features, training, r, true, false);

  GradientResult out;
  out.prediction = prediction_of(model, p);
  const Real err = out.prediction - target;
  out.loss = err * err;
  if (!std::isfinite(out.loss)) throw NumericError("bptt_gradients: non-finite loss");

  out.grad = zeros_like(model);
  MilModel& g = out.grad;
  const Mat d_head_out = Mat::Constant(1, p.head_out.cols(), 2.0 * err);
  const Mat d_head_in = back_layers(model.hn, p.hn_cache, d_head_out, g.hn);

  const Eigen::Index steps = features.cols();
  Mat d_features;
  switch (model.kind) {
    case ModelKind::instance_space_nn:
      d_features = d_head_in;
      break;
    case ModelKind::embedding_space_lstm: {
      Mat d_hidden = Mat::Zero(model.hidden_size(), steps);
      d_hidden.col(steps - 1) = d_head_in.col(0);
      d_features = lstm_backward_sequence(*model.lstm, p.lstm_cache, d_hidden, *g.lstm);
      break;
    }
    case ModelKind::instance_space_lstm:
      d_features = lstm_backward_sequence(*model.lstm, p.lstm_cache, d_head_in, *g.lstm);
      break;
    case ModelKind::csc_instance_space_lstm: {
      const Eigen::Index hs = model.hidden_size();
      d_features = lstm_backward_sequence(*model.lstm, p.lstm_cache, d_head_in.topRows(hs), *g.lstm);
      d_features += d_head_in.bottomRows(d_head_in.rows() - hs);
      break;
    }
  }
  back_layers(model.fe, p.fe_cache, d_features, g.fe);
  check_finite(g, "bptt_gradients");
  return out;
}

GradientResult bptt_gradients(const MilModel& model, const TrajectoryBag& bag, Real target) {
  return bptt_gradients(model, feature_matrix(bag), target);
}

namespace {

using XMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using XVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

XMat reference_dense(const DenseLayer& l, const XMat& x) {
  XMat pre = l.weights.cast<long double>() * x;
  pre.colwise() += l.bias.cast<long double>();
  const long double slope = l.leaky_slope;
  switch (l.activation) {
    case Activation::identity: return pre;
    case Activation::relu: return pre.unaryExpr([](long double v) { return v > 0 ? v : 0.0L; });
    case Activation::leaky_relu: return pre.unaryExpr([slope](long double v) { return v > 0 ? v : slope * v; });
  }
  return pre;
}

long double sigmoid_l(long double z) { return 1.0L / (1.0L + std::exp(-z)); }

}  // namespace

long double reference_return(const MilModel& m, const Mat& features) {
  require(features.cols() >= 1 && features.rows() == m.feature_dim, "reference_return: bad bag shape");
  XMat x = m.normaliser.apply(features).cast<long double>();
  for (const auto& l : m.fe) x = reference_dense(l, x);
  const Eigen::Index steps = x.cols();
  XMat head_in;
  if (m.kind == ModelKind::instance_space_nn) {
    head_in = x;
  } else {
    const LstmCell& c = *m.lstm;
    const Eigen::Index hs = c.hidden_size();
    const XMat wi = c.w_input.cast<long double>(), wf = c.w_forget.cast<long double>();
    const XMat wg = c.w_cell.cast<long double>(), wo = c.w_output.cast<long double>();
    XVec h = XVec::Zero(hs), cs = XVec::Zero(hs), xh(x.rows() + hs);
    XMat hidden(hs, steps);
    for (Eigen::Index t = 0; t < steps; ++t) {
      xh << x.col(t), h;
      for (Eigen::Index j = 0; j < hs; ++j) {
        const long double i = sigmoid_l(wi.row(j).dot(xh) + c.b_input[j]);
        const long double f = sigmoid_l(wf.row(j).dot(xh) + c.b_forget[j]);
        const long double g = std::tanh(wg.row(j).dot(xh) + c.b_cell[j]);
        const long double o = sigmoid_l(wo.row(j).dot(xh) + c.b_output[j]);
        cs[j] = f * cs[j] + i * g;
        hidden(j, t) = o * std::tanh(cs[j]);
      }
      h = hidden.col(t);
    }
    if (m.kind == ModelKind::embedding_space_lstm) {
      head_in = hidden.rightCols(1);
    } else if (m.kind == ModelKind::instance_space_lstm) {
      head_in = hidden;
    } else {
      head_in.resize(hs + x.rows(), steps);
      head_in << hidden, x;
    }
  }
  for (const auto& l : m.hn) head_in = reference_dense(l, head_in);
  long double total = 0.0L;
  for (Eigen::Index t = 0; t < head_in.cols(); ++t) total += head_in(0, t);
  return total;
}

GradCheckReport finite_diff_check(const MilModel& model, const Mat& features, Real target, Real eps) {
  require(eps >= 1e-7 && eps <= 1e-3, "finite_diff_check: eps must lie in [1e-7, 1e-3]");
  const Vec analytic = flatten_params(bptt_gradients(model, features, target).grad);
  MilModel probe = model;
  std::vector<Real*> slots;
  for_each_param(probe, [&](const std::string&, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) slots.push_back(t.data() + i);
  });
  auto loss = [&] {
    const long double e = reference_return(probe, features) - static_cast<long double>(target);
    return e * e;
  };
  GradCheckReport report;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Real original = *slots[i];
    const Real up = original + eps, down = original - eps;
    *slots[i] = up;
    const long double loss_up = loss();
    *slots[i] = down;
    const long double loss_down = loss();
    *slots[i] = original;
    const auto numeric = static_cast<Real>((loss_up - loss_down) / (static_cast<long double>(up) - down));
    const Real a = analytic[static_cast<Eigen::Index>(i)];
    const Real rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > report.max_relative_error || report.worst_index < 0) {
      report.max_relative_error = rel;
      report.worst_index = static_cast<Eigen::Index>(i);
      report.analytic = a;
      report.numeric = numeric;
    }
  }
  return report;
}

GradCheckReport finite_diff_check(const MilModel& model, const TrajectoryBag& bag, Real eps) {
  return finite_diff_check(model, feature_matrix(bag), bag.bag_return, eps);
}

}  // namespace nmrm
