#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nmrm/bag.hpp"

namespace nmrm {

// Toy MIL datasets with two-dimensional instances:
//   toggle (ts, v): r = v * ts                     (Markovian)
//   push   (p, v):  p = 1 flips a hidden switch, then r = v if the switch is on
//   dial   (m, v):  d <- d + m, then r = d * v
enum class ToyKind { toggle, push, dial };

std::string_view to_string(ToyKind kind);
ToyKind parse_toy(std::string_view name);
bool is_toy_name(std::string_view name);

struct ToyConfig {
  int min_length = 10;
  int max_length = 20;
  Real value_low = 0.0;
  Real value_high = 1.0;
  Real toggle_on_probability = 0.5;
  // These two set how much the hidden state matters: a trained
  // instance_space_nn, blind to it, reaches return MSE near 3.3 on push and
  // 5.5 on dial with these values.
  Real push_probability = 0.2;
  Real dial_step = 0.42;  // m ~ Uniform(-dial_step, dial_step)
  Real dial_start = 0.0;
};

// Labels a given instance sequence: per-step rewards, hidden states and return.
TrajectoryBag label_toy_bag(ToyKind kind, std::span<const std::array<Real, 2>> instances,
                            const ToyConfig& cfg = {});

TrajectoryBag gen_toy_bag(ToyKind kind, Rng& rng, const ToyConfig& cfg = {});

std::vector<TrajectoryBag> gen_toy_dataset(ToyKind kind, std::size_t n, std::uint64_t seed,
                                           const ToyConfig& cfg = {});

}  // namespace nmrm
