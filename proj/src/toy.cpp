#include "nmrm/data/toy.hpp"

#include <string>

namespace nmrm {

std::string_view to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::toggle: return "toggle";
    case ToyKind::push: return "push";
    case ToyKind::dial: return "dial";
  }
  return "toggle";
}

bool is_toy_name(std::string_view name) {
  return name == "toggle" || name == "push" || name == "dial";
}

ToyKind parse_toy(std::string_view name) {
  if (name == "toggle") return ToyKind::toggle;
  if (name == "push") return ToyKind::push;
  if (name == "dial") return ToyKind::dial;
  throw ContractError("unknown toy dataset '" + std::string(name) + "' (expected toggle|push|dial)");
}

TrajectoryBag label_toy_bag(ToyKind kind, std::span<const std::array<Real, 2>> instances,
                            const ToyConfig& cfg) {
  TrajectoryBag bag;
  bag.task = std::string(to_string(kind));
  Real switch_on = 0.0;
  Real dial = cfg.dial_start;
  for (const auto& [a, v] : instances) {
    Real reward = 0.0;
    Real hidden = 0.0;
    switch (kind) {
      case ToyKind::toggle:
        require(a == 0.0 || a == 1.0, "toggle instance switch must be 0 or 1");
        reward = v * a;
        hidden = a;
        break;
      case ToyKind::push:
        require(a == 0.0 || a == 1.0, "push instance press must be 0 or 1");
        if (a == 1.0) switch_on = 1.0 - switch_on;
        reward = switch_on == 1.0 ? v : 0.0;
        hidden = switch_on;
        break;
      case ToyKind::dial:
        dial += a;
        reward = dial * v;
        hidden = dial;
        break;
    }
    bag.states.push_back({a, v});
    bag.actions.push_back(0);
    bag.rewards.push_back(reward);
    bag.hiddens.push_back({hidden});
  }
  bag.bag_return = sum_rewards(bag);
  return bag;
}

TrajectoryBag gen_toy_bag(ToyKind kind, Rng& rng, const ToyConfig& cfg) {
  require(cfg.min_length >= 1 && cfg.min_length <= cfg.max_length, "toy config: bad length range");
  std::uniform_int_distribution<int> length(cfg.min_length, cfg.max_length);
  std::uniform_real_distribution<Real> value(cfg.value_low, cfg.value_high);
  std::uniform_real_distribution<Real> dial_step(-cfg.dial_step, cfg.dial_step);
  std::bernoulli_distribution toggle_on(cfg.toggle_on_probability);
  std::bernoulli_distribution press(cfg.push_probability);

  const int n = length(rng);
  std::vector<std::array<Real, 2>> instances(static_cast<std::size_t>(n));
  for (auto& inst : instances) {
    switch (kind) {
      case ToyKind::toggle: inst[0] = toggle_on(rng) ? 1.0 : 0.0; break;
      case ToyKind::push: inst[0] = press(rng) ? 1.0 : 0.0; break;
      case ToyKind::dial: inst[0] = dial_step(rng); break;
    }
    inst[1] = value(rng);
  }
  return label_toy_bag(kind, instances, cfg);
}

std::vector<TrajectoryBag> gen_toy_dataset(ToyKind kind, std::size_t n, std::uint64_t seed,
                                           const ToyConfig& cfg) {
  Rng rng(seed);
  std::vector<TrajectoryBag> bags;
  bags.reserve(n);
  for (std::size_t i = 0; i < n; ++i) bags.push_back(gen_toy_bag(kind, rng, cfg));
  return bags;
}

}  // namespace nmrm
