#include "nmrm/envs/lunar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nmrm::lunar {

namespace {

void check_contacts(const LunarState& s) {
  require((s.contact_left == 0 || s.contact_left == 1) &&
              (s.contact_right == 0 || s.contact_right == 1),
          "lunar: contact flags must be 0 or 1");
}

}  // namespace

Real pad_reward(const LunarState& s) {
  check_contacts(s);
  return (-0.2 <= s.x && s.x <= 0.2 && s.contact_left == 1 && s.contact_right == 1) ? 1.0 : 0.0;
}

Real no_contact_reward(const LunarState& s) {
  check_contacts(s);
  return (s.contact_left == 0 && s.contact_right == 0) ? 1.0 : 0.0;
}

Real hover_reward(const LunarState& s) {
  return (-0.5 <= s.x && s.x <= 0.5 && 0.75 <= s.y && s.y <= 1.25) ? 1.0 : 0.0;
}

Real shaping_reward(const LunarState& s, Real y_target) {
  const Real dy = s.y - y_target;
  const Real error = std::sqrt(s.x * s.x + dy * dy) + std::sqrt(s.vx * s.vx + s.vy * s.vy) +
                     std::abs(s.theta) + std::abs(s.theta_dot);
  return 0.1 * std::max(2.0 - error, 0.0);
}

OracleStep oracle_step(const LunarState& s, int hidden) {
  require(hidden >= 0 && hidden <= kPadTarget,
          "lunar oracle: hidden state must lie in [0, 50], got " + std::to_string(hidden));
  OracleStep out;
  Components& c = out.components;
  const Real pad = pad_reward(s);
  out.hidden_next = pad == 1.0 ? std::min(hidden + 1, kPadTarget) : hidden;
  if (out.hidden_next < kPadTarget) {
    c.pad = pad;
    c.shaping = shaping_reward(s, kTargetYLanding);
    c.total = c.pad + c.shaping;
  } else {
    c.hover_stage = true;
    c.no_contact = no_contact_reward(s);
    c.hover = hover_reward(s);
    c.shaping = shaping_reward(s, kTargetYHover);
    c.total = c.no_contact + c.hover + c.shaping;
  }
  out.reward = c.total;
  return out;
}

}  // namespace nmrm::lunar
