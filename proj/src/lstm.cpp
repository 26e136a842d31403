#include "nmrm/numeric/lstm.hpp"

#include <cmath>

namespace nmrm {

namespace {

Real sigmoid(Real z) { return 1.0 / (1.0 + std::exp(-z)); }

Mat uniform_matrix(Eigen::Index rows, Eigen::Index cols, Real bound, Rng& rng) {
  std::uniform_real_distribution<Real> dist(-bound, bound);
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

void check_shapes(const LstmCell& cell) {
  const auto h = cell.hidden_size();
  const auto cols = cell.w_input.cols();
  const bool ok = h >= 1 && cols > h && cell.w_forget.rows() == h && cell.w_cell.rows() == h &&
                  cell.w_output.rows() == h && cell.w_forget.cols() == cols &&
                  cell.w_cell.cols() == cols && cell.w_output.cols() == cols &&
                  cell.b_input.size() == h && cell.b_forget.size() == h &&
                  cell.b_cell.size() == h && cell.b_output.size() == h;
  require(ok, "lstm: inconsistent cell parameter shapes");
}

}  // namespace

LstmCell make_lstm(Eigen::Index in, Eigen::Index hidden, Rng& rng) {
  require(in >= 1 && hidden >= 1, "make_lstm: dimensions must be positive");
  const Real bound = std::sqrt(1.0 / static_cast<Real>(in + hidden));
  LstmCell cell;
  cell.w_input = uniform_matrix(hidden, in + hidden, bound, rng);
  cell.w_forget = uniform_matrix(hidden, in + hidden, bound, rng);
  cell.w_cell = uniform_matrix(hidden, in + hidden, bound, rng);
  cell.w_output = uniform_matrix(hidden, in + hidden, bound, rng);
  cell.b_input = Vec::Zero(hidden);
  cell.b_forget = Vec::Ones(hidden);
  cell.b_cell = Vec::Zero(hidden);
  cell.b_output = Vec::Zero(hidden);
  return cell;
}

LstmCell zeros_like(const LstmCell& like) {
  LstmCell z;
  z.w_input = Mat::Zero(like.w_input.rows(), like.w_input.cols());
  z.w_forget = Mat::Zero(like.w_forget.rows(), like.w_forget.cols());
  z.w_cell = Mat::Zero(like.w_cell.rows(), like.w_cell.cols());
  z.w_output = Mat::Zero(like.w_output.rows(), like.w_output.cols());
  z.b_input = Vec::Zero(like.b_input.size());
  z.b_forget = Vec::Zero(like.b_forget.size());
  z.b_cell = Vec::Zero(like.b_cell.size());
  z.b_output = Vec::Zero(like.b_output.size());
  return z;
}

LstmState lstm_step(const LstmCell& cell, const Vec& x, const Vec& h_prev, const Vec& c_prev) {
  check_shapes(cell);
  const auto hs = cell.hidden_size();
  if (x.size() != cell.input_dim() || h_prev.size() != hs || c_prev.size() != hs)
    throw ContractError("lstm_step: input/state dimension mismatch");
  Vec xh(x.size() + hs);
  xh << x, h_prev;
  const Vec i = (cell.w_input * xh + cell.b_input).unaryExpr(&sigmoid);
  const Vec f = (cell.w_forget * xh + cell.b_forget).unaryExpr(&sigmoid);
  const Vec g = (cell.w_cell * xh + cell.b_cell).array().tanh().matrix();
  const Vec o = (cell.w_output * xh + cell.b_output).unaryExpr(&sigmoid);
  LstmState next;
  next.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.array().tanh().matrix());
  return next;
}

Mat lstm_forward_sequence(const LstmCell& cell, const Mat& x, LstmSequenceCache* cache) {
  check_shapes(cell);
  const auto in = cell.input_dim();
  const auto hs = cell.hidden_size();
  const auto steps = x.cols();
  if (x.rows() != in)
    throw ContractError("lstm_forward_sequence: input has " + std::to_string(x.rows()) +
                        " rows, cell expects " + std::to_string(in));

  // Input projections for all steps at once; only the recurrent part is sequential.
  const Mat zi = cell.w_input.leftCols(in) * x;
  const Mat zf = cell.w_forget.leftCols(in) * x;
  const Mat zg = cell.w_cell.leftCols(in) * x;
  const Mat zo = cell.w_output.leftCols(in) * x;
  const auto ri = cell.w_input.rightCols(hs);
  const auto rf = cell.w_forget.rightCols(hs);
  const auto rg = cell.w_cell.rightCols(hs);
  const auto ro = cell.w_output.rightCols(hs);

  Mat hidden(hs, steps);
  Vec h = Vec::Zero(hs);
  Vec c = Vec::Zero(hs);
  if (cache) {
    cache->x = x;
    cache->h_prev.resize(hs, steps);
    cache->c_prev.resize(hs, steps);
    cache->gate_i.resize(hs, steps);
    cache->gate_f.resize(hs, steps);
    cache->gate_g.resize(hs, steps);
    cache->gate_o.resize(hs, steps);
    cache->c.resize(hs, steps);
    cache->tanh_c.resize(hs, steps);
  }
  Vec i(hs), f(hs), g(hs), o(hs), tc(hs);
  for (Eigen::Index t = 0; t < steps; ++t) {
    if (cache) {
      cache->h_prev.col(t) = h;
      cache->c_prev.col(t) = c;
    }
    i = (zi.col(t) + ri * h + cell.b_input).unaryExpr(&sigmoid);
    f = (zf.col(t) + rf * h + cell.b_forget).unaryExpr(&sigmoid);
    g = (zg.col(t) + rg * h + cell.b_cell).array().tanh().matrix();
    o = (zo.col(t) + ro * h + cell.b_output).unaryExpr(&sigmoid);
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    tc = c.array().tanh().matrix();
    h = o.cwiseProduct(tc);
    hidden.col(t) = h;
    if (cache) {
      cache->gate_i.col(t) = i;
      cache->gate_f.col(t) = f;
      cache->gate_g.col(t) = g;
      cache->gate_o.col(t) = o;
      cache->c.col(t) = c;
      cache->tanh_c.col(t) = tc;
    }
  }
  return hidden;
}

Mat lstm_backward_sequence(const LstmCell& cell, const LstmSequenceCache& cache,
                           const Mat& grad_h, LstmCell& grad) {
  const auto in = cell.input_dim();
  const auto hs = cell.hidden_size();
  const auto steps = cache.x.cols();
  require(grad_h.rows() == hs && grad_h.cols() == steps,
          "lstm_backward_sequence: grad_h shape mismatch");

  Mat dz_i(hs, steps), dz_f(hs, steps), dz_g(hs, steps), dz_o(hs, steps);
  const auto ri = cell.w_input.rightCols(hs);
  const auto rf = cell.w_forget.rightCols(hs);
  const auto rg = cell.w_cell.rightCols(hs);
  const auto ro = cell.w_output.rightCols(hs);

  Vec dh_next = Vec::Zero(hs);
  Vec dc_next = Vec::Zero(hs);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto i = cache.gate_i.col(t).array();
    const auto f = cache.gate_f.col(t).array();
    const auto g = cache.gate_g.col(t).array();
    const auto o = cache.gate_o.col(t).array();
    const auto tc = cache.tanh_c.col(t).array();

    const Vec dh = grad_h.col(t) + dh_next;
    const Vec dc = (dh.array() * o * (1.0 - tc * tc)).matrix() + dc_next;
    dz_o.col(t) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dz_i.col(t) = (dc.array() * g * i * (1.0 - i)).matrix();
    dz_g.col(t) = (dc.array() * i * (1.0 - g * g)).matrix();
    dz_f.col(t) = (dc.array() * cache.c_prev.col(t).array() * f * (1.0 - f)).matrix();
    dc_next = (dc.array() * f).matrix();
    dh_next = ri.transpose() * dz_i.col(t) + rf.transpose() * dz_f.col(t) +
              rg.transpose() * dz_g.col(t) + ro.transpose() * dz_o.col(t);
  }

  const auto accumulate = [&](Mat& w, Vec& b, const Mat& dz) {
    w.leftCols(in).noalias() += dz * cache.x.transpose();
    w.rightCols(hs).noalias() += dz * cache.h_prev.transpose();
    b.noalias() += dz.rowwise().sum();
  };
  accumulate(grad.w_input, grad.b_input, dz_i);
  accumulate(grad.w_forget, grad.b_forget, dz_f);
  accumulate(grad.w_cell, grad.b_cell, dz_g);
  accumulate(grad.w_output, grad.b_output, dz_o);

  Mat dx = cell.w_input.leftCols(in).transpose() * dz_i;
  dx.noalias() += cell.w_forget.leftCols(in).transpose() * dz_f;
  dx.noalias() += cell.w_cell.leftCols(in).transpose() * dz_g;
  dx.noalias() += cell.w_output.leftCols(in).transpose() * dz_o;
  return dx;
}

}  // namespace nmrm
