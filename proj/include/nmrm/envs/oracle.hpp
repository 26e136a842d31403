#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nmrm/bag.hpp"
#include "nmrm/envs/nav.hpp"

namespace nmrm {

enum class TaskId { timer, moving, key, charger };

inline constexpr std::array<TaskId, 4> kAllTasks = {TaskId::timer, TaskId::moving, TaskId::key,
                                                     TaskId::charger};

std::string_view to_string(TaskId id);
TaskId parse_task(std::string_view name);

// Oracle hidden state; Timer, Key and Charger use one component, Moving two
// (treasure left edge, velocity).
struct HiddenState {
  std::array<Real, 2> values{};
  int dim = 1;

  Real operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  std::vector<Real> to_vector() const { return {values.begin(), values.begin() + dim}; }
  static HiddenState from_vector(std::span<const Real> v);

  friend bool operator==(const HiddenState&, const HiddenState&) = default;
};

namespace zones {
inline constexpr Rect kTreasure{0.4, 0.6, 0.7, 0.9};
inline constexpr Rect kKey{0.4, 0.6, 0.1, 0.3};
inline constexpr Real kChargerMaxY = 0.3;
inline constexpr Rect kSpawnLeft{0.05, 0.15, 0.45, 0.65};
inline constexpr Rect kSpawnRight{0.85, 0.95, 0.45, 0.65};
inline constexpr Real kMovingWidth = 0.2;
inline constexpr Real kMovingTrackEnd = 0.8;
}  // namespace zones

// A non-Markovian navigation task: hidden dynamics delta, reward R and h0.
class OracleTask {
 public:
  explicit OracleTask(TaskId id) : id_(id) {}

  TaskId id() const { return id_; }
  std::string_view name() const { return to_string(id_); }
  int episode_length() const { return 100; }
  int hidden_dim() const { return id_ == TaskId::moving ? 2 : 1; }
  std::array<Rect, 2> spawn_zones() const { return {zones::kSpawnLeft, zones::kSpawnRight}; }

  HiddenState initial_hidden() const;
  // delta(h, s, a)
  HiddenState update(const HiddenState& h, const NavState& s, NavAction a) const;
  // R(s, a, h') where h' is the already-updated hidden state.
  Real reward(const NavState& s, NavAction a, const HiddenState& h_next) const;

  // h' = delta(h, s, a) first, then r = R(s, a, h').
  std::pair<HiddenState, Real> update_and_reward(const HiddenState& h, const NavState& s,
                                                 NavAction a) const {
    HiddenState next = update(h, s, a);
    return {next, reward(s, a, next)};
  }

 private:
  TaskId id_;
};

struct StepRecord {
  NavState state;
  NavAction action;
  Real reward;
  HiddenState hidden_after;
};

// Runs `steps` steps from `start`: hidden update, reward, then state update.
// `next_action(state, t, rng)` picks a_t; `visit(StepRecord)` sees each step.
template <class ActionFn, class Visitor>
void simulate_episode(const OracleTask& task, NavState start, int steps, ActionFn&& next_action,
                      Rng& rng, const NavConfig& cfg, Visitor&& visit) {
  HiddenState h = task.initial_hidden();
  NavState s = start;
  for (int t = 0; t < steps; ++t) {
    const NavAction a = next_action(s, t, rng);
    auto [h_next, r] = task.update_and_reward(h, s, a);
    visit(StepRecord{s, a, r, h_next});
    h = h_next;
    s = nav_step(s, a, rng, cfg);
  }
}

// Uniform zone choice, then uniform position inside it.
NavState sample_spawn(const OracleTask& task, Rng& rng);

using ActionSource = std::function<NavAction(const NavState& state, int t, Rng& rng)>;

ActionSource uniform_random_actions();
ActionSource fixed_actions(std::vector<NavAction> actions);

// Spawns, then simulates a full episode. The bag return is the left-to-right
// sum of the per-step rewards.
TrajectoryBag rollout(const OracleTask& task, const ActionSource& source, std::uint64_t seed,
                      const NavConfig& cfg = {});
TrajectoryBag rollout(const OracleTask& task, std::span<const NavAction> actions,
                      std::uint64_t seed, const NavConfig& cfg = {});

// Simulates |actions| steps from a given start (no spawn sampling).
TrajectoryBag rollout_from(const OracleTask& task, NavState start,
                           std::span<const NavAction> actions, std::uint64_t seed,
                           const NavConfig& cfg = {});

}  // namespace nmrm
