#include "nmrm/rl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nmrm/numeric/adam.hpp"
#include "nmrm/numeric/params.hpp"

namespace nmrm {

QNetwork make_q_network(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden, Eigen::Index actions,
                        Rng& rng) {
  require(input_dim >= 1 && actions >= 1, "q network: dimensions must be positive");
  QNetwork net;
  Eigen::Index in = input_dim;
  for (Eigen::Index w : hidden) {
    net.layers.push_back(make_dense(in, w, Activation::relu, 0.0, rng));
    in = w;
  }
  net.layers.push_back(make_dense(in, actions, Activation::identity, 0.0, rng));
  return net;
}

Mat q_values(const QNetwork& net, const Mat& observations) {
  if (observations.rows() != net.input_dim())
    throw ContractError("q network: observation has " + std::to_string(observations.rows()) +
                        " dimensions, expected " + std::to_string(net.input_dim()));
  Rng unused(0);
  Mat x = observations;
  for (const auto& layer : net.layers) x = dense_forward(layer, x, false, unused);
  return x;
}

int greedy_action(const QNetwork& net, const Vec& observation) {
  const Mat q = q_values(net, Mat(observation));
  Eigen::Index best = 0;
  q.col(0).maxCoeff(&best);
  return static_cast<int>(best);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, Eigen::Index observation_dim)
    : capacity_(capacity),
      obs_(observation_dim, static_cast<Eigen::Index>(capacity)),
      next_obs_(observation_dim, static_cast<Eigen::Index>(capacity)),
      actions_(capacity),
      rewards_(capacity) {
  require(capacity >= 1, "replay buffer: capacity must be positive");
}

void ReplayBuffer::push(const Vec& obs, int action, Real reward, const Vec& next_obs) {
  require(obs.size() == obs_.rows() && next_obs.size() == obs_.rows(), "replay buffer: observation size mismatch");
  const auto c = static_cast<Eigen::Index>(head_);
  obs_.col(c) = obs;
  next_obs_.col(c) = next_obs;
  actions_[head_] = action;
  rewards_[head_] = reward;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  require(i < size_, "replay buffer: index out of range");
  const std::size_t k = slot(i);
  const auto c = static_cast<Eigen::Index>(k);
  return {obs_.col(c), actions_[k], rewards_[k], next_obs_.col(c)};
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  require(size_ >= 1, "replay buffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  Batch b;
  const auto n = static_cast<Eigen::Index>(batch);
  b.observations.resize(obs_.rows(), n);
  b.next_observations.resize(obs_.rows(), n);
  b.actions.resize(batch);
  b.rewards.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t k = slot(pick(rng));
    const auto c = static_cast<Eigen::Index>(k);
    b.observations.col(j) = obs_.col(c);
    b.next_observations.col(j) = next_obs_.col(c);
    b.actions[static_cast<std::size_t>(j)] = actions_[k];
    b.rewards[j] = rewards_[k];
  }
  return b;
}

Vec bellman_targets(const Mat& q_next_online, const Mat& q_next_target, const Vec& rewards, Real gamma,
                    bool double_q) {
  require(q_next_online.rows() == q_next_target.rows() && q_next_online.cols() == q_next_target.cols() &&
              q_next_target.cols() == rewards.size(),
          "bellman_targets: shape mismatch");
  Vec y(rewards.size());
  for (Eigen::Index j = 0; j < rewards.size(); ++j) {
    Eigen::Index a = 0;
    if (double_q)
      q_next_online.col(j).maxCoeff(&a);
    else
      q_next_target.col(j).maxCoeff(&a);
    y[j] = rewards[j] + gamma * q_next_target(a, j);
  }
  return y;
}

Real epsilon_at(const DqnConfig& config, int episode) {
  if (config.epsilon_decay_episodes <= 0 || episode >= config.epsilon_decay_episodes) return config.epsilon_end;
  const Real frac = static_cast<Real>(episode) / static_cast<Real>(config.epsilon_decay_episodes);
  return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
}

namespace {

// Preallocated activations for batched forward/backward passes; the generic
// dense_forward allocates per call, which dominated runtime at batch 128.
struct QWorkspace {
  std::vector<Mat> pre, out;
  Mat d, d_next, next_online, next_target;

  const Mat& forward(const QNetwork& net, const Mat& x) {
    pre.resize(net.layers.size());
    out.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const DenseLayer& l = net.layers[i];
      pre[i].noalias() = l.weights * (i == 0 ? x : out[i - 1]);
      pre[i].colwise() += l.bias;
      if (l.activation == Activation::relu)
        out[i] = pre[i].cwiseMax(0.0);
      else
        out[i] = pre[i];
    }
    return out.back();
  }
};

// One gradient step on the mean squared Bellman error. Returns the loss.
Real q_update(QNetwork& online, const QNetwork& target, QNetwork& grad, Vec& grad_flat, Vec& params,
              AdamState& adam, const ReplayBuffer::Batch& b, const DqnConfig& cfg, QWorkspace& ws) {
  ws.next_online = ws.forward(online, b.next_observations);
  ws.next_target = ws.forward(target, b.next_observations);
  const Vec y = bellman_targets(ws.next_online, ws.next_target, b.rewards, cfg.gamma, cfg.double_q);
  const Mat& q = ws.forward(online, b.observations);

  const auto n = static_cast<Real>(b.rewards.size());
  ws.d.setZero(q.rows(), q.cols());
  Real loss = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const int a = b.actions[static_cast<std::size_t>(j)];
    const Real diff = q(a, j) - y[j];
    loss += diff * diff / n;
    ws.d(a, j) = 2.0 * diff / n;
  }
  if (!std::isfinite(loss)) throw NumericError("dqn: non-finite value loss");

  for (std::size_t i = online.layers.size(); i-- > 0;) {
    const DenseLayer& l = online.layers[i];
    if (l.activation == Activation::relu) ws.d.array() *= (ws.pre[i].array() > 0.0).cast<Real>();
    const Mat& input = i == 0 ? b.observations : ws.out[i - 1];
    grad.layers[i].weights.noalias() = ws.d * input.transpose();
    grad.layers[i].bias = ws.d.rowwise().sum();
    if (i > 0) {
      ws.d_next.noalias() = l.weights.transpose() * ws.d;
      std::swap(ws.d, ws.d_next);
    }
  }
  flatten_params_into(grad, grad_flat);
  adam_update(params, grad_flat, adam);
  assign_params(online, params);
  return loss;
}

}  // namespace

DqnResult dqn_train(const WrappedEnv& env_template, const DqnConfig& cfg, std::uint64_t seed,
                    const EpisodeCallback& on_episode) {
  require(cfg.episodes >= 1, "dqn: need at least one episode");
  require(cfg.batch_size >= 1 && cfg.batch_size <= cfg.buffer_capacity, "dqn: batch size must fit the buffer");
  require(cfg.polyak > 0.0 && cfg.polyak <= 1.0, "dqn: polyak coefficient must lie in (0, 1]");

  WrappedEnv env = env_template;
  Rng env_rng(mix_seed(seed, 1));
  Rng act_rng(mix_seed(seed, 2));
  Rng init_rng(mix_seed(seed, 3));
  Rng batch_rng(mix_seed(seed, 4));

  const Eigen::Index obs_dim = env.observation_dim();
  QNetwork online = make_q_network(obs_dim, cfg.hidden, kNumActions, init_rng);
  QNetwork target = online;
  QNetwork grad = online;
  Vec params = flatten_params(online);
  Vec target_params = params;
  Vec grad_flat = params;
  AdamState adam(params.size(), AdamConfig{cfg.learning_rate, 0.0});
  ReplayBuffer buffer(cfg.buffer_capacity, obs_dim);
  QWorkspace ws;

  DqnResult result;
  result.curve.source = env.source();
  result.curve.seed = seed;
  result.curve.config = cfg;
  std::uniform_real_distribution<Real> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any_action(0, kNumActions - 1);

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    const Real eps = epsilon_at(cfg, episode);
    Vec obs = env.reset(env_rng);
    Real oracle_return = 0.0, source_return = 0.0;
    while (!env.done()) {
      const int a = coin(act_rng) < eps ? any_action(act_rng) : greedy_action(online, obs);
      WrappedStep st = env.step(action_from_index(a), env_rng);
      oracle_return += st.oracle_reward;
      source_return += st.reward;
      buffer.push(obs, a, st.reward, st.observation);
      obs = std::move(st.observation);
      if (buffer.size() >= cfg.batch_size) {
        try {
          q_update(online, target, grad, grad_flat, params, adam, buffer.sample(cfg.batch_size, batch_rng), cfg, ws);
        } catch (const NumericError& e) {
          throw NumericError("dqn: episode " + std::to_string(episode) + ": " + e.what());
        }
        target_params = (1.0 - cfg.polyak) * target_params + cfg.polyak * params;
        assign_params(target, target_params);
      }
    }
    result.curve.oracle_returns.push_back(oracle_return);
    result.curve.source_returns.push_back(source_return);
    result.curve.epsilons.push_back(eps);
    if (on_episode) on_episode(episode, oracle_return, eps);
  }
  result.policy = std::move(online);
  return result;
}

ReturnStats return_stats(std::vector<Real> returns) {
  require(!returns.empty(), "return_stats: no returns");
  ReturnStats s;
  s.returns = returns;
  std::sort(returns.begin(), returns.end());
  auto quantile = [&](Real q) {
    const Real pos = q * static_cast<Real>(returns.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, returns.size() - 1);
    return returns[lo] + (pos - static_cast<Real>(lo)) * (returns[hi] - returns[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  return s;
}

ReturnStats evaluate_policy(const QNetwork& policy, const WrappedEnv& env_template, int episodes,
                            std::uint64_t seed) {
  require(episodes >= 1, "evaluate_policy: need at least one episode");
  require(policy.input_dim() == env_template.observation_dim(),
          "evaluate_policy: policy input does not match the environment observation");
  WrappedEnv env = env_template;
  Rng rng(seed);
  std::vector<Real> returns;
  for (int e = 0; e < episodes; ++e) {
    Vec obs = env.reset(rng);
    Real total = 0.0;
    while (!env.done()) {
      WrappedStep st = env.step(action_from_index(greedy_action(policy, obs)), rng);
      total += st.oracle_reward;
      obs = std::move(st.observation);
    }
    returns.push_back(total);
  }
  return return_stats(std::move(returns));
}

Real tail_median(const TrainingCurve& curve, int window) {
  require(window >= 1 && !curve.oracle_returns.empty(), "tail_median: empty window");
  const std::size_t n = std::min(curve.oracle_returns.size(), static_cast<std::size_t>(window));
  return return_stats({curve.oracle_returns.end() - static_cast<std::ptrdiff_t>(n), curve.oracle_returns.end()})
      .median;
}

void write_curves_csv(const std::vector<TrainingCurve>& curves, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "episode,oracle_return,epsilon,reward_source,seed\n";
  for (const auto& c : curves)
    for (std::size_t e = 0; e < c.oracle_returns.size(); ++e)
      out << e << ',' << c.oracle_returns[e] << ',' << c.epsilons[e] << ',' << to_string(c.source) << ','
          << c.seed << '\n';
}

}  // namespace nmrm
