#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nmrm/envs/lunar.hpp"
#include "nmrm/envs/nav.hpp"
#include "nmrm/envs/oracle.hpp"

using namespace nmrm;

namespace {

const NavConfig kNoNoise{0.1, 0.02, false};

HiddenState scalar(Real v) { return HiddenState::from_vector(std::vector<Real>{v}); }

}  // namespace

TEST(Nav, DeterministicMoveUp) {
  Rng rng(0);
  const NavState s = nav_step({0.5, 0.5}, NavAction::up, rng, kNoNoise);
  EXPECT_DOUBLE_EQ(s.x, 0.5);
  EXPECT_DOUBLE_EQ(s.y, 0.6);
}

TEST(Nav, ClipsAtBoundary) {
  Rng rng(0);
  EXPECT_EQ(nav_step({0.0, 0.0}, NavAction::left, rng, kNoNoise), (NavState{0.0, 0.0}));
  EXPECT_EQ(nav_step({1.0, 1.0}, NavAction::up, rng, kNoNoise), (NavState{1.0, 1.0}));
}

TEST(Nav, NoiseStdMatchesPerAxis) {
  Rng rng(2024);
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const NavState s = nav_step({0.5, 0.5}, NavAction::noop, rng);
    const double dx = s.x - 0.5, dy = s.y - 0.5;
    sx += dx;
    sy += dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double stdx = std::sqrt(sxx / n - (sx / n) * (sx / n));
  const double stdy = std::sqrt(syy / n - (sy / n) * (sy / n));
  EXPECT_NEAR(stdx, 0.02, 0.02 * 0.05);
  EXPECT_NEAR(stdy, 0.02, 0.02 * 0.05);
}

TEST(Oracle, TimerPenaltyBeforeFiftyOne) {
  const OracleTask task(TaskId::timer);
  auto [h, r] = task.update_and_reward(scalar(29), {0.5, 0.8}, NavAction::noop);
  EXPECT_EQ(h[0], 30);
  EXPECT_EQ(r, -1.0);
  std::tie(h, r) = task.update_and_reward(scalar(50), {0.5, 0.8}, NavAction::noop);
  EXPECT_EQ(h[0], 51);
  EXPECT_EQ(r, 1.0);
}

TEST(Oracle, MovingBouncesAtLeftEnd) {
  const OracleTask task(TaskId::moving);
  const auto h0 = HiddenState::from_vector(std::vector<Real>{0.0, -0.02});
  auto [h, r] = task.update_and_reward(h0, {0.9, 0.1}, NavAction::noop);
  EXPECT_DOUBLE_EQ(h[0], -0.02);
  EXPECT_DOUBLE_EQ(h[1], 0.02);
  EXPECT_EQ(r, 0.0);
  EXPECT_EQ(task.initial_hidden(), HiddenState::from_vector(std::vector<Real>{0.4, -0.02}));
}

TEST(Oracle, MovingRewardsInsideMovingWindow) {
  const OracleTask task(TaskId::moving);
  const auto h0 = HiddenState::from_vector(std::vector<Real>{0.3, 0.02});
  // edge' = 0.32, window [0.32, 0.52] x [0.7, 0.9]
  EXPECT_EQ(task.update_and_reward(h0, {0.4, 0.8}, NavAction::noop).second, 1.0);
  EXPECT_EQ(task.update_and_reward(h0, {0.6, 0.8}, NavAction::noop).second, 0.0);
}

TEST(Oracle, KeyZoneIsNotTreasure) {
  const OracleTask task(TaskId::key);
  auto [h, r] = task.update_and_reward(scalar(0), {0.5, 0.2}, NavAction::noop);
  EXPECT_EQ(h[0], 1.0);
  EXPECT_EQ(r, 0.0);
  EXPECT_EQ(task.update_and_reward(h, {0.5, 0.8}, NavAction::noop).second, 1.0);
  EXPECT_EQ(task.update_and_reward(scalar(0), {0.5, 0.8}, NavAction::noop).second, 0.0);
}

TEST(Oracle, ChargerCapsAtOne) {
  const OracleTask task(TaskId::charger);
  auto [h, r] = task.update_and_reward(scalar(0.98), {0.5, 0.2}, NavAction::noop);
  EXPECT_EQ(h[0], 1.0);
  EXPECT_EQ(r, 0.0);
  EXPECT_DOUBLE_EQ(task.update_and_reward(scalar(0.5), {0.5, 0.8}, NavAction::noop).second, 0.5);
}

TEST(Oracle, OutsideAllZonesGivesZero) {
  for (TaskId id : kAllTasks) {
    const OracleTask task(id);
    const auto h = task.update_and_reward(task.initial_hidden(), {0.1, 0.55}, NavAction::noop).first;
    EXPECT_EQ(task.reward({0.1, 0.55}, NavAction::noop, h), 0.0) << task.name();
  }
}

TEST(Oracle, UnknownTaskName) {
  EXPECT_THROW(parse_task("lander"), ContractError);
  EXPECT_EQ(parse_task("charger"), TaskId::charger);
}

TEST(Rollout, NoopFromSpawnHasZeroReturn) {
  for (TaskId id : kAllTasks) {
    const std::vector<NavAction> noop(100, NavAction::noop);
    const TrajectoryBag bag = rollout(OracleTask(id), noop, 17, kNoNoise);
    EXPECT_EQ(bag.size(), 100u);
    EXPECT_EQ(bag.bag_return, 0.0);
  }
}

TEST(Rollout, TimerHeldInTreasureReturnsZero) {
  const std::vector<NavAction> noop(100, NavAction::noop);
  const TrajectoryBag bag = rollout_from(OracleTask(TaskId::timer), {0.5, 0.8}, noop, 3, kNoNoise);
  double expected = 0.0;
  for (int t = 1; t <= 100; ++t) expected += t <= 50 ? -1.0 : 1.0;
  EXPECT_EQ(bag.bag_return, expected);
  EXPECT_EQ(bag.bag_return, 0.0);
}

TEST(Rollout, StoredRewardsReplayThroughOracle) {
  for (TaskId id : kAllTasks) {
    const OracleTask task(id);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const TrajectoryBag bag = rollout(task, uniform_random_actions(), seed);
      EXPECT_EQ(sum_rewards(bag), bag.bag_return);
      HiddenState h = task.initial_hidden();
      for (std::size_t t = 0; t < bag.size(); ++t) {
        const NavState s{bag.states[t][0], bag.states[t][1]};
        auto [next, r] = task.update_and_reward(h, s, action_from_index(bag.actions[t]));
        ASSERT_EQ(r, bag.rewards[t]);
        ASSERT_EQ(next.to_vector(), bag.hiddens[t]);
        h = next;
      }
    }
  }
}

TEST(Rollout, HiddenStateInvariants) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto timer = rollout(OracleTask(TaskId::timer), uniform_random_actions(), seed);
    for (std::size_t t = 0; t < timer.size(); ++t) ASSERT_EQ(timer.hiddens[t][0], static_cast<Real>(t + 1));

    const auto charger = rollout(OracleTask(TaskId::charger), uniform_random_actions(), seed);
    for (std::size_t t = 1; t < charger.size(); ++t) {
      ASSERT_GE(charger.hiddens[t][0], charger.hiddens[t - 1][0]);
      ASSERT_LE(charger.hiddens[t][0], 1.0);
    }
    const auto key = rollout(OracleTask(TaskId::key), uniform_random_actions(), seed);
    for (std::size_t t = 1; t < key.size(); ++t) ASSERT_GE(key.hiddens[t][0], key.hiddens[t - 1][0]);

    const auto moving = rollout(OracleTask(TaskId::moving), uniform_random_actions(), seed);
    for (const auto& h : moving.hiddens) {
      ASSERT_GE(h[0], -0.02 - 1e-12);
      ASSERT_LE(h[0], 0.82 + 1e-12);
      ASSERT_NEAR(std::abs(h[1]), 0.02, 1e-15);
    }
  }
}

TEST(Rollout, DeterministicWithoutNoise) {
  std::vector<NavAction> actions;
  for (int i = 0; i < 100; ++i) actions.push_back(action_from_index(i % 5));
  const auto a = rollout(OracleTask(TaskId::key), actions, 1, kNoNoise);
  const auto b = rollout(OracleTask(TaskId::key), actions, 1, kNoNoise);
  EXPECT_EQ(a, b);
  EXPECT_THROW(rollout(OracleTask(TaskId::key), std::vector<NavAction>(99), 1), ContractError);
}

TEST(Lunar, PadRewardOnBothContacts) {
  lunar::LunarState s;
  s.contact_left = s.contact_right = 1;
  const auto step = lunar::oracle_step(s, 10);
  EXPECT_EQ(step.components.pad, 1.0);
  EXPECT_EQ(step.hidden_next, 11);
}

TEST(Lunar, ShapingAtTargetIsPointTwo) {
  lunar::LunarState s;
  EXPECT_DOUBLE_EQ(lunar::shaping_reward(s, 0.0), 0.2);
  s.y = 1.0;
  EXPECT_DOUBLE_EQ(lunar::shaping_reward(s, 1.0), 0.2);
}

TEST(Lunar, HoverStageAfterFiftyOnPad) {
  lunar::LunarState s;
  s.y = 1.0;
  const auto step = lunar::oracle_step(s, 50);
  EXPECT_EQ(step.hidden_next, 50);
  EXPECT_EQ(step.components.no_contact, 1.0);
  EXPECT_EQ(step.components.hover, 1.0);
  EXPECT_DOUBLE_EQ(step.reward, 1.0 + 1.0 + 0.2);
  EXPECT_THROW(lunar::oracle_step(s, 51), ContractError);
}
