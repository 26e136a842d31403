#include <gtest/gtest.h>

#include <cmath>

#include "nmrm/numeric/adam.hpp"
#include "nmrm/numeric/dense.hpp"
#include "nmrm/numeric/grad_check.hpp"
#include "nmrm/numeric/lstm.hpp"
#include "nmrm/numeric/params.hpp"

using namespace nmrm;

namespace {

DenseLayer fixed_layer(Mat w, Vec b, Activation act) {
  DenseLayer l;
  l.weights = std::move(w);
  l.bias = std::move(b);
  l.activation = act;
  return l;
}

// Independent single-unit LSTM, written out gate by gate.
struct ScalarLstm {
  double wi_x, wi_h, bi, wf_x, wf_h, bf, wg_x, wg_h, bg, wo_x, wo_h, bo;

  std::pair<double, double> step(double x, double h, double c) const {
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double i = sig(wi_x * x + wi_h * h + bi);
    const double f = sig(wf_x * x + wf_h * h + bf);
    const double g = std::tanh(wg_x * x + wg_h * h + bg);
    const double o = sig(wo_x * x + wo_h * h + bo);
    const double c2 = f * c + i * g;
    return {o * std::tanh(c2), c2};
  }
};

LstmCell to_cell(const ScalarLstm& s) {
  LstmCell cell;
  auto row = [](double a, double b) {
    Mat m(1, 2);
    m << a, b;
    return m;
  };
  cell.w_input = row(s.wi_x, s.wi_h);
  cell.w_forget = row(s.wf_x, s.wf_h);
  cell.w_cell = row(s.wg_x, s.wg_h);
  cell.w_output = row(s.wo_x, s.wo_h);
  cell.b_input = Vec::Constant(1, s.bi);
  cell.b_forget = Vec::Constant(1, s.bf);
  cell.b_cell = Vec::Constant(1, s.bg);
  cell.b_output = Vec::Constant(1, s.bo);
  return cell;
}

}  // namespace

TEST(Dense, ZeroParametersRelu) {
  Rng rng(1);
  auto l = fixed_layer(Mat::Zero(2, 2), Vec::Zero(2), Activation::relu);
  Vec x(2);
  x << 3, -2;
  EXPECT_EQ(dense_forward(l, x, false, rng), Vec::Zero(2));
}

TEST(Dense, IdentityLayer) {
  Rng rng(1);
  auto l = fixed_layer(Mat::Identity(2, 2), Vec::Zero(2), Activation::identity);
  Vec x(2);
  x << 1.5, -0.5;
  EXPECT_EQ(dense_forward(l, x, false, rng), x);
}

TEST(Dense, ReluClipsNegativePreActivation) {
  Rng rng(1);
  Mat w(1, 2);
  w << 1, 1;
  auto l = fixed_layer(w, Vec::Constant(1, -1.0), Activation::relu);
  Vec x(2);
  x << 0.3, 0.4;
  EXPECT_EQ(dense_forward(l, x, false, rng)[0], 0.0);
}

TEST(Dense, DimensionMismatchThrows) {
  Rng rng(1);
  auto l = fixed_layer(Mat::Zero(2, 3), Vec::Zero(2), Activation::relu);
  EXPECT_THROW(dense_forward(l, Vec(Vec::Zero(2)), false, rng), ContractError);
}

TEST(Dense, DropoutIsIdentityInEvalMode) {
  Rng rng(5);
  DenseLayer l = make_dense(4, 6, Activation::relu, 0.5, rng);
  Mat x = Mat::Random(4, 7);
  Rng a(1), b(2);
  EXPECT_EQ(dense_forward(l, x, false, a), dense_forward(l, x, false, b));
  l.dropout_rate = 0.0;
  Rng c(3);
  EXPECT_EQ(dense_forward(l, x, true, c), dense_forward(l, x, false, a));
}

TEST(Dense, InvertedDropoutPreservesMeanActivation) {
  Rng rng(9);
  auto l = fixed_layer(Mat::Identity(1, 1), Vec::Zero(1), Activation::identity);
  l.dropout_rate = 0.3;
  Mat x = Mat::Ones(1, 200000);
  const Mat y = dense_forward(l, x, true, rng);
  EXPECT_NEAR(y.mean(), 1.0, 0.01);
}

TEST(Lstm, ZeroCellStaysAtZero) {
  Rng rng(1);
  LstmCell cell = zeros_like(make_lstm(3, 2, rng));
  Vec x(3);
  x << 0.4, -1.2, 7.0;
  const auto s = lstm_step(cell, x, Vec::Zero(2), Vec::Zero(2));
  EXPECT_EQ(s.h, Vec::Zero(2));
  EXPECT_EQ(s.c, Vec::Zero(2));
}

TEST(Lstm, ZeroPreviousCellGivesInputTimesCandidate) {
  Rng rng(3);
  LstmCell cell = make_lstm(2, 2, rng);
  Vec x(2), h(2);
  x << 0.3, -0.9;
  h << 0.1, 0.2;
  const auto s = lstm_step(cell, x, h, Vec::Zero(2));
  Vec xh(4);
  xh << x, h;
  const Vec i = (1.0 + (-(cell.w_input * xh + cell.b_input)).array().exp()).inverse().matrix();
  const Vec g = (cell.w_cell * xh + cell.b_cell).array().tanh().matrix();
  EXPECT_LT((s.c - i.cwiseProduct(g)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lstm, MatchesScalarReference) {
  const ScalarLstm ref{0.5, -0.3, 0.1, 0.8, 0.2, 1.0, -0.7, 0.9, 0.05, 0.3, -0.4, -0.2};
  const LstmCell cell = to_cell(ref);
  const double xs[] = {0.7, -1.1, 0.25, 2.0};
  double h = 0.0, c = 0.0;
  Vec hv = Vec::Zero(1), cv = Vec::Zero(1);
  Mat seq(1, 4);
  for (int t = 0; t < 4; ++t) {
    std::tie(h, c) = ref.step(xs[t], h, c);
    const auto s = lstm_step(cell, Vec::Constant(1, xs[t]), hv, cv);
    hv = s.h;
    cv = s.c;
    EXPECT_NEAR(hv[0], h, 1e-15);
    EXPECT_NEAR(cv[0], c, 1e-15);
    seq(0, t) = xs[t];
  }
  const Mat hs = lstm_forward_sequence(cell, seq);
  EXPECT_NEAR(hs(0, 3), h, 1e-15);
}

TEST(Lstm, SequenceBackwardMatchesFiniteDifferences) {
  Rng rng(11);
  LstmCell cell = make_lstm(3, 2, rng);
  const Mat x = Mat::Random(3, 6);
  const Mat weights = Mat::Random(2, 6);  // L = sum(weights .* H)
  LstmSequenceCache cache;
  lstm_forward_sequence(cell, x, &cache);
  LstmCell grad = zeros_like(cell);
  const Mat dx = lstm_backward_sequence(cell, cache, weights, grad);

  auto loss_of = [&](const LstmCell& c, const Mat& in) {
    return lstm_forward_sequence(c, in).cwiseProduct(weights).sum();
  };
  const Vec p = flatten_params(cell);
  LstmCell probe = cell;
  const auto report = finite_diff_check(
      p,
      [&](const Vec& q) {
        assign_params(probe, q);
        return loss_of(probe, x);
      },
      flatten_params(grad), 1e-5);
  EXPECT_LE(report.max_relative_error, 1e-6);

  Vec xflat = Eigen::Map<const Vec>(x.data(), x.size());
  const auto input_report = finite_diff_check(
      xflat,
      [&](const Vec& q) { return loss_of(cell, Eigen::Map<const Mat>(q.data(), 3, 6)); },
      Eigen::Map<const Vec>(dx.data(), dx.size()), 1e-5);
  EXPECT_LE(input_report.max_relative_error, 1e-6);
}

TEST(Adam, ZeroGradientIsIdentity) {
  Vec p(3);
  p << 1.0, -2.0, 0.5;
  const Vec before = p;
  AdamState s(3, AdamConfig{});
  for (int i = 0; i < 5; ++i) adam_update(p, Vec::Zero(3), s);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  for (double g : {3.7, -0.002}) {
    Vec p = Vec::Constant(1, 0.25);
    AdamState s(1, AdamConfig{0.01});
    adam_update(p, Vec::Constant(1, g), s);
    EXPECT_NEAR(p[0] - 0.25, -0.01 * (g > 0 ? 1 : -1), 1e-6);
  }
}

TEST(Adam, TwoStepsOnSquareMatchHandRecurrence) {
  // f(theta) = theta^2, lr 0.1, theta0 = 1, written out step by step.
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double theta = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = 2.0 * theta;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
  }
  Vec p = Vec::Constant(1, 1.0);
  AdamState s(1, AdamConfig{0.1});
  for (int t = 0; t < 2; ++t) adam_update(p, Vec::Constant(1, 2.0 * p[0]), s);
  EXPECT_NEAR(p[0], theta, 1e-14);
}

TEST(Adam, DecoupledWeightDecayShrinksFirst) {
  Vec p = Vec::Constant(1, 2.0);
  AdamState s(1, AdamConfig{0.1, 0.5});
  adam_update(p, Vec::Zero(1), s);
  EXPECT_DOUBLE_EQ(p[0], 2.0 * (1 - 0.05));
}

TEST(Adam, RejectsNaNGradient) {
  Vec p = Vec::Zero(2);
  AdamState s(2, AdamConfig{});
  Vec g(2);
  g << 1.0, std::nan("");
  EXPECT_THROW(adam_update(p, g, s), NumericError);
  EXPECT_THROW(adam_update(p, Vec::Zero(3), s), ContractError);
}

TEST(GradCheck, LinearModelQuadraticLossIsExact) {
  Vec w(3);
  w << 0.2, -0.4, 1.1;
  Vec x(3);
  x << 1.0, 2.0, -0.5;
  auto loss = [&](const Vec& p) {
    const double e = p.dot(x) - 0.3;
    return e * e;
  };
  const Vec grad = 2.0 * (w.dot(x) - 0.3) * x;
  EXPECT_LE(finite_diff_check(w, loss, grad, 1e-5).max_relative_error, 1e-8);
  const auto bad = finite_diff_check(w, loss, 2.0 * grad, 1e-5);
  EXPECT_NEAR(bad.max_relative_error, 0.5, 1e-6);  // |2n - n| / |2n|
}

TEST(GradCheck, EpsilonOutOfRangeThrows) {
  const Vec p = Vec::Zero(1);
  auto loss = [](const Vec& q) { return q[0]; };
  EXPECT_THROW(finite_diff_check(p, loss, Vec::Ones(1), 1e-2), ContractError);
  EXPECT_THROW(finite_diff_check(p, loss, Vec::Ones(1), 1e-9), ContractError);
}
