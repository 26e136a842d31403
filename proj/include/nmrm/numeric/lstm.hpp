#pragma once

#include <concepts>
#include <string>
#include <type_traits>

#include "nmrm/common.hpp"

namespace nmrm {

// Standard LSTM cell. Each gate matrix acts on the concatenation [x; h_prev]
// and has shape H x (in + H).
struct LstmCell {
  Mat w_input, w_forget, w_cell, w_output;
  Vec b_input, b_forget, b_cell, b_output;

  Eigen::Index hidden_size() const { return w_input.rows(); }
  Eigen::Index input_dim() const { return w_input.cols() - w_input.rows(); }
};

// Uniform(+-sqrt(1/(in+H))) weights, zero biases except forget gate bias = 1.
LstmCell make_lstm(Eigen::Index in, Eigen::Index hidden, Rng& rng);

// Same shapes as `like`, all zeros.
LstmCell zeros_like(const LstmCell& like);

struct LstmState {
  Vec h;
  Vec c;
};

LstmState lstm_step(const LstmCell& cell, const Vec& x, const Vec& h_prev, const Vec& c_prev);

// Per-step gate activations of a full sequence unroll.
struct LstmSequenceCache {
  Mat x;                          // in x T
  Mat h_prev, c_prev;             // H x T, state entering step t
  Mat gate_i, gate_f, gate_g, gate_o;
  Mat c, tanh_c;                  // H x T
};

// Runs the cell over the columns of `x` from a zero initial state; returns
// the H x T matrix of hidden states after each step.
Mat lstm_forward_sequence(const LstmCell& cell, const Mat& x, LstmSequenceCache* cache = nullptr);

// Full backpropagation through time. `grad_h` holds dL/dh_t for every step
// (H x T). Accumulates parameter gradients into `grad`, returns dL/dx (in x T).
Mat lstm_backward_sequence(const LstmCell& cell, const LstmSequenceCache& cache,
                           const Mat& grad_h, LstmCell& grad);

template <class Cell, class Fn>
  requires std::same_as<std::remove_const_t<Cell>, LstmCell>
void for_each_param(Cell& cell, const std::string& prefix, Fn&& fn) {
  fn(prefix + ".w_input", cell.w_input);
  fn(prefix + ".w_forget", cell.w_forget);
  fn(prefix + ".w_cell", cell.w_cell);
  fn(prefix + ".w_output", cell.w_output);
  fn(prefix + ".b_input", cell.b_input);
  fn(prefix + ".b_forget", cell.b_forget);
  fn(prefix + ".b_cell", cell.b_cell);
  fn(prefix + ".b_output", cell.b_output);
}

template <class Cell, class Fn>
  requires std::same_as<std::remove_const_t<Cell>, LstmCell>
void for_each_param(Cell& cell, Fn&& fn) {
  for_each_param(cell, std::string("lstm"), fn);
}

}  // namespace nmrm
