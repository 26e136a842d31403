#pragma once

#include "nmrm/common.hpp"

namespace nmrm::lunar {

// [x, y, vx, vy, theta, theta_dot, contact_left, contact_right]
struct LunarState {
  Real x = 0.0;
  Real y = 0.0;
  Real vx = 0.0;
  Real vy = 0.0;
  Real theta = 0.0;
  Real theta_dot = 0.0;
  int contact_left = 0;
  int contact_right = 0;
};

inline constexpr int kPadTarget = 50;
inline constexpr Real kTargetYLanding = 0.0;
inline constexpr Real kTargetYHover = 1.0;

// 1 when central (|x| <= 0.2) with both legs down.
Real pad_reward(const LunarState& s);
// 1 when neither leg touches the ground.
Real no_contact_reward(const LunarState& s);
// 1 inside the hover zone -0.5 <= x <= 0.5, 0.75 <= y <= 1.25.
Real hover_reward(const LunarState& s);
// 0.1 * max(2 - (dist to (0, y_target) + |v| + |theta| + |theta_dot|), 0)
Real shaping_reward(const LunarState& s, Real y_target);

// Reward terms active in the selected stage; inactive terms are zero.
struct Components {
  Real pad = 0.0;
  Real no_contact = 0.0;
  Real hover = 0.0;
  Real shaping = 0.0;
  Real total = 0.0;
  bool hover_stage = false;
};

struct OracleStep {
  int hidden_next = 0;
  Real reward = 0.0;
  Components components;
};

// Hidden state counts pad timesteps (capped at 50). The updated count selects
// the stage: landing (pad + shaping towards y=0) below 50, hover
// (no_contact + hover + shaping towards y=1) once it reaches 50.
OracleStep oracle_step(const LunarState& s, int hidden);

}  // namespace nmrm::lunar
