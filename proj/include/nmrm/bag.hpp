#pragma once

#include <string>
#include <vector>

#include "nmrm/common.hpp"

namespace nmrm {

// One labelled trajectory (MIL bag). Per-step arrays are parallel: step t
// holds the state s_t, the action a_t, the oracle reward r_t and the oracle
// hidden state after its update, h_{t+1}.
struct TrajectoryBag {
  std::string task;
  int class_id = 0;
  Real bag_return = 0.0;
  std::vector<std::vector<Real>> states;
  std::vector<int> actions;
  std::vector<Real> rewards;
  std::vector<std::vector<Real>> hiddens;
  bool noisy = false;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  Eigen::Index feature_dim() const {
    return states.empty() ? 0 : static_cast<Eigen::Index>(states.front().size());
  }

  friend bool operator==(const TrajectoryBag&, const TrajectoryBag&) = default;
};

// Left-to-right sum of the per-step rewards.
inline Real sum_rewards(const TrajectoryBag& bag) {
  Real total = 0.0;
  for (Real r : bag.rewards) total += r;
  return total;
}

// States as a feature matrix, one column per step.
inline Mat feature_matrix(const TrajectoryBag& bag) {
  const Eigen::Index dim = bag.feature_dim();
  Mat x(dim, static_cast<Eigen::Index>(bag.size()));
  for (std::size_t t = 0; t < bag.size(); ++t) {
    if (static_cast<Eigen::Index>(bag.states[t].size()) != dim)
      throw ContractError("feature_matrix: ragged state vectors in bag");
    for (Eigen::Index d = 0; d < dim; ++d) x(d, static_cast<Eigen::Index>(t)) = bag.states[t][d];
  }
  return x;
}

}  // namespace nmrm
