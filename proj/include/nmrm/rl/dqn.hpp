#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nmrm/numeric/dense.hpp"
#include "nmrm/rl/wrapped_env.hpp"

namespace nmrm {

// ReLU MLP mapping observations (columns) to one value per action.
struct QNetwork {
  std::vector<DenseLayer> layers;

  Eigen::Index input_dim() const { return layers.front().in_dim(); }
  Eigen::Index num_actions() const { return layers.back().out_dim(); }
};

QNetwork make_q_network(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden, Eigen::Index actions,
                        Rng& rng);
Mat q_values(const QNetwork& net, const Mat& observations);
int greedy_action(const QNetwork& net, const Vec& observation);

template <class Net, class Fn>
  requires std::same_as<std::remove_const_t<Net>, QNetwork>
void for_each_param(Net& net, Fn&& fn) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) for_each_param(net.layers[i], "q." + std::to_string(i), fn);
}

struct Transition {
  Vec observation;
  int action = 0;
  Real reward = 0.0;
  Vec next_observation;
};

// Fixed-capacity FIFO: once full, each push evicts the oldest transition.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Eigen::Index observation_dim);

  void push(const Vec& obs, int action, Real reward, const Vec& next_obs);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition.
  Transition at(std::size_t i) const;

  struct Batch {
    Mat observations, next_observations;  // dim x B
    std::vector<int> actions;
    Vec rewards;
  };
  // Uniform sampling with replacement.
  Batch sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t slot(std::size_t i) const { return (head_ + capacity_ - size_ + i) % capacity_; }

  std::size_t capacity_;
  Mat obs_, next_obs_;
  std::vector<int> actions_;
  std::vector<Real> rewards_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
};

// y_j = r_j + gamma * Q_target(s'_j, a*_j). With double_q, a* is the online
// network's argmax; otherwise it is the target network's own argmax.
// Every step bootstraps: episodes only end by the time limit.
Vec bellman_targets(const Mat& q_next_online, const Mat& q_next_target, const Vec& rewards, Real gamma,
                    bool double_q);

struct DqnConfig {
  std::vector<Eigen::Index> hidden = {256, 128, 64};
  std::size_t buffer_capacity = 50000;
  std::size_t batch_size = 128;
  Real gamma = 0.99;
  Real learning_rate = 1e-3;
  Real polyak = 5e-3;
  bool double_q = true;
  Real epsilon_start = 1.0;
  Real epsilon_end = 0.05;
  int epsilon_decay_episodes = 200;
  int episodes = 400;
};

// Linear decay from epsilon_start to epsilon_end over the decay episodes,
// constant afterwards.
Real epsilon_at(const DqnConfig& config, int episode);

struct TrainingCurve {
  std::vector<Real> oracle_returns;
  std::vector<Real> source_returns;
  std::vector<Real> epsilons;
  RewardSource source = RewardSource::oracle_with_hidden;
  std::uint64_t seed = 0;
  DqnConfig config;
};

struct DqnResult {
  QNetwork policy;
  TrainingCurve curve;
};

using EpisodeCallback = std::function<void(int episode, Real oracle_return, Real epsilon)>;

// Epsilon-greedy DQN with one gradient step on the Bellman MSE per
// environment step (once the buffer holds a full batch) and a Polyak target
// update after each step. Throws NumericError if the loss stops being finite.
DqnResult dqn_train(const WrappedEnv& env, const DqnConfig& config, std::uint64_t seed,
                    const EpisodeCallback& on_episode = {});

struct ReturnStats {
  std::vector<Real> returns;
  Real median = 0.0;
  Real q1 = 0.0;
  Real q3 = 0.0;
  Real iqr() const { return q3 - q1; }
};

// Median and quartiles by linear interpolation between order statistics.
ReturnStats return_stats(std::vector<Real> returns);

// Greedy rollouts through a fresh copy of `env`, scored by the oracle.
ReturnStats evaluate_policy(const QNetwork& policy, const WrappedEnv& env, int episodes, std::uint64_t seed);

// Median oracle return over the last `window` episodes of a curve.
Real tail_median(const TrainingCurve& curve, int window);

void write_curves_csv(const std::vector<TrainingCurve>& curves, const std::filesystem::path& path);

}  // namespace nmrm
