#include "nmrm/rl/wrapped_env.hpp"

#include <string>

namespace nmrm {

std::string_view to_string(RewardSource source) {
  switch (source) {
    case RewardSource::oracle_with_hidden: return "oracle_with_hidden";
    case RewardSource::oracle_without_hidden: return "oracle_without_hidden";
    case RewardSource::learned_model: return "learned_model";
  }
  return "oracle_with_hidden";
}

RewardSource parse_reward_source(std::string_view name) {
  for (RewardSource s :
       {RewardSource::oracle_with_hidden, RewardSource::oracle_without_hidden, RewardSource::learned_model})
    if (name == to_string(s)) return s;
  if (name == "oracle") return RewardSource::oracle_with_hidden;
  if (name == "model") return RewardSource::learned_model;
  throw ContractError("unknown reward source '" + std::string(name) +
                      "' (expected oracle_with_hidden, oracle_without_hidden or learned_model)");
}

WrappedEnv::WrappedEnv(TaskId task, RewardSource source, std::shared_ptr<const MilModel> model, NavConfig nav)
    : task_(task), source_(source), model_(std::move(model)), nav_(nav), oracle_h_(task_.initial_hidden()) {
  if (source_ == RewardSource::learned_model) {
    require(model_ != nullptr, "wrapped env: learned_model source needs a model");
    require(model_->feature_dim == 2, "wrapped env: model must take 2-dimensional states");
    require(model_->normaliser.mean.size() == 2 && model_->normaliser.stddev.size() == 2,
            "wrapped env: model normaliser does not match the 2-dimensional state");
    stepper_.emplace(*model_);
  }
}

int WrappedEnv::observation_dim() const {
  switch (source_) {
    case RewardSource::oracle_with_hidden: return 2 + task_.hidden_dim();
    case RewardSource::oracle_without_hidden: return 2;
    case RewardSource::learned_model: return 2 + static_cast<int>(model_->hidden_size());
  }
  return 2;
}

Vec WrappedEnv::augmentation() const {
  switch (source_) {
    case RewardSource::oracle_with_hidden: {
      Vec h(task_.hidden_dim());
      for (int i = 0; i < task_.hidden_dim(); ++i) h[i] = oracle_h_[i];
      return h;
    }
    case RewardSource::oracle_without_hidden: return Vec();
    case RewardSource::learned_model: return stepper_->hidden();
  }
  return Vec();
}

Vec WrappedEnv::observation() const {
  const Vec aug = augmentation();
  Vec obs(2 + aug.size());
  obs << s_.x, s_.y, aug;
  return obs;
}

Vec WrappedEnv::reset(Rng& rng) { return reset(sample_spawn(task_, rng)); }

Vec WrappedEnv::reset(NavState start) {
  s_ = start;
  oracle_h_ = task_.initial_hidden();
  if (stepper_) stepper_->reset();
  t_ = 0;
  active_ = true;
  return observation();
}

WrappedStep WrappedEnv::step(NavAction action, Rng& rng) {
  require(active_ && !done(), "wrapped env: step called outside an active episode");
  WrappedStep out;
  auto [h_next, r] = task_.update_and_reward(oracle_h_, s_, action);
  oracle_h_ = h_next;
  out.oracle_reward = r;
  if (stepper_) {
    Vec raw(2);
    raw << s_.x, s_.y;
    out.reward = stepper_->step(raw);
  } else {
    out.reward = r;
  }
  s_ = nav_step(s_, action, rng, nav_);
  ++t_;
  out.done = done();
  if (out.done) active_ = false;
  out.observation = observation();
  return out;
}

}  // namespace nmrm
