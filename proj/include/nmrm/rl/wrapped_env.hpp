#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "nmrm/envs/oracle.hpp"
#include "nmrm/mil/model.hpp"

namespace nmrm {

enum class RewardSource { oracle_with_hidden, oracle_without_hidden, learned_model };

std::string_view to_string(RewardSource source);
RewardSource parse_reward_source(std::string_view name);

struct WrappedStep {
  Vec observation;
  Real reward = 0.0;         // from the configured source
  Real oracle_reward = 0.0;  // always the true oracle's reward
  bool done = false;
};

// Navigation task wrapped so the agent sees concat(s, h) and receives rewards
// from either the oracle or a learned model. The oracle hidden state is always
// tracked as well, so every episode can be scored by the true oracle.
class WrappedEnv {
 public:
  WrappedEnv(TaskId task, RewardSource source, std::shared_ptr<const MilModel> model = nullptr,
             NavConfig nav = {});

  // Samples a spawn position and resets both hidden states.
  Vec reset(Rng& rng);
  Vec reset(NavState start);
  WrappedStep step(NavAction action, Rng& rng);

  int observation_dim() const;
  int step_count() const { return t_; }
  bool done() const { return t_ >= task_.episode_length(); }
  const OracleTask& task() const { return task_; }
  RewardSource source() const { return source_; }
  const NavState& position() const { return s_; }
  const HiddenState& oracle_hidden() const { return oracle_h_; }
  // Hidden part of the observation (empty without augmentation).
  Vec augmentation() const;

 private:
  Vec observation() const;

  OracleTask task_;
  RewardSource source_;
  std::shared_ptr<const MilModel> model_;
  std::optional<ModelStepper> stepper_;
  NavConfig nav_;
  NavState s_;
  HiddenState oracle_h_;
  int t_ = 0;
  bool active_ = false;
};

}  // namespace nmrm
