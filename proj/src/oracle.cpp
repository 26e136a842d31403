#include "nmrm/envs/oracle.hpp"

#include <algorithm>
#include <string>

namespace nmrm {

std::string_view to_string(TaskId id) {
  switch (id) {
    case TaskId::timer: return "timer";
    case TaskId::moving: return "moving";
    case TaskId::key: return "key";
    case TaskId::charger: return "charger";
  }
  return "timer";
}

TaskId parse_task(std::string_view name) {
  for (TaskId id : kAllTasks)
    if (to_string(id) == name) return id;
  throw ContractError("unknown task id '" + std::string(name) + "' (expected timer|moving|key|charger)");
}

HiddenState HiddenState::from_vector(std::span<const Real> v) {
  require(v.size() == 1 || v.size() == 2, "HiddenState: expected 1 or 2 components");
  HiddenState h;
  h.dim = static_cast<int>(v.size());
  std::copy(v.begin(), v.end(), h.values.begin());
  return h;
}

HiddenState OracleTask::initial_hidden() const {
  HiddenState h;
  h.dim = hidden_dim();
  if (id_ == TaskId::moving) h.values = {0.4, -0.02};
  return h;
}

HiddenState OracleTask::update(const HiddenState& h, const NavState& s, NavAction) const {
  HiddenState next = h;
  switch (id_) {
    case TaskId::timer:
      next.values[0] = h[0] + 1.0;
      break;
    case TaskId::moving: {
      const Real edge = h[0] + h[1];
      next.values[0] = edge;
      next.values[1] = (edge > 0.0 && edge < zones::kMovingTrackEnd) ? h[1] : -h[1];
      break;
    }
    case TaskId::key:
      if (zones::kKey.contains(s)) next.values[0] = 1.0;
      break;
    case TaskId::charger:
      if (s.y <= zones::kChargerMaxY) next.values[0] = std::min(h[0] + 0.02, 1.0);
      break;
  }
  return next;
}

Real OracleTask::reward(const NavState& s, NavAction, const HiddenState& h_next) const {
  const Real in_treasure = zones::kTreasure.contains(s) ? 1.0 : 0.0;
  switch (id_) {
    case TaskId::timer:
      return in_treasure * (h_next[0] <= 50.0 ? -1.0 : 1.0);
    case TaskId::moving: {
      const Real edge = h_next[0];
      const bool inside = edge <= s.x && s.x <= edge + zones::kMovingWidth &&
                          zones::kTreasure.y0 <= s.y && s.y <= zones::kTreasure.y1;
      return inside ? 1.0 : 0.0;
    }
    case TaskId::key:
    case TaskId::charger:
      return in_treasure * h_next[0];
  }
  return 0.0;
}

NavState sample_spawn(const OracleTask& task, Rng& rng) {
  const auto zones = task.spawn_zones();
  std::uniform_int_distribution<int> pick(0, 1);
  const Rect& z = zones[static_cast<std::size_t>(pick(rng))];
  std::uniform_real_distribution<Real> ux(z.x0, z.x1);
  std::uniform_real_distribution<Real> uy(z.y0, z.y1);
  const Real x = ux(rng);
  return {x, uy(rng)};
}

ActionSource uniform_random_actions() {
  return [](const NavState&, int, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    return static_cast<NavAction>(pick(rng));
  };
}

ActionSource fixed_actions(std::vector<NavAction> actions) {
  return [actions = std::move(actions)](const NavState&, int t, Rng&) {
    if (t < 0 || static_cast<std::size_t>(t) >= actions.size())
      throw ContractError("fixed_actions: action sequence exhausted at step " + std::to_string(t));
    return actions[static_cast<std::size_t>(t)];
  };
}

namespace {

TrajectoryBag simulate_to_bag(const OracleTask& task, NavState start, int steps,
                              const ActionSource& source, Rng& rng, const NavConfig& cfg) {
  TrajectoryBag bag;
  bag.task = std::string(task.name());
  bag.states.reserve(static_cast<std::size_t>(steps));
  bag.actions.reserve(static_cast<std::size_t>(steps));
  bag.rewards.reserve(static_cast<std::size_t>(steps));
  bag.hiddens.reserve(static_cast<std::size_t>(steps));
  simulate_episode(task, start, steps, source, rng, cfg, [&](const StepRecord& rec) {
    bag.states.push_back({rec.state.x, rec.state.y});
    bag.actions.push_back(static_cast<int>(rec.action));
    bag.rewards.push_back(rec.reward);
    bag.hiddens.push_back(rec.hidden_after.to_vector());
  });
  bag.bag_return = sum_rewards(bag);
  return bag;
}

}  // namespace

TrajectoryBag rollout(const OracleTask& task, const ActionSource& source, std::uint64_t seed,
                      const NavConfig& cfg) {
  Rng rng(seed);
  const NavState start = sample_spawn(task, rng);
  return simulate_to_bag(task, start, task.episode_length(), source, rng, cfg);
}

TrajectoryBag rollout(const OracleTask& task, std::span<const NavAction> actions,
                      std::uint64_t seed, const NavConfig& cfg) {
  require(static_cast<int>(actions.size()) == task.episode_length(),
          "rollout: action sequence must have exactly T=" + std::to_string(task.episode_length()) +
              " actions");
  return rollout(task, fixed_actions({actions.begin(), actions.end()}), seed, cfg);
}

TrajectoryBag rollout_from(const OracleTask& task, NavState start,
                           std::span<const NavAction> actions, std::uint64_t seed,
                           const NavConfig& cfg) {
  require(start.x >= 0.0 && start.x <= 1.0 && start.y >= 0.0 && start.y <= 1.0,
          "rollout_from: start outside [0,1]^2");
  Rng rng(seed);
  return simulate_to_bag(task, start, static_cast<int>(actions.size()),
                         fixed_actions({actions.begin(), actions.end()}), rng, cfg);
}

}  // namespace nmrm
