#include "nmrm/envs/nav.hpp"

#include <algorithm>
#include <string>

namespace nmrm {

std::string_view to_string(NavAction a) {
  switch (a) {
    case NavAction::up: return "up";
    case NavAction::down: return "down";
    case NavAction::left: return "left";
    case NavAction::right: return "right";
    case NavAction::noop: return "noop";
  }
  return "noop";
}

NavAction action_from_index(int index) {
  if (index < 0 || index >= kNumActions)
    throw ContractError("action index out of range: " + std::to_string(index));
  return static_cast<NavAction>(index);
}

NavState nav_step(const NavState& pos, NavAction action, Rng& rng, const NavConfig& cfg) {
  Real dx = 0.0;
  Real dy = 0.0;
  switch (action) {
    case NavAction::up: dy = cfg.step_size; break;
    case NavAction::down: dy = -cfg.step_size; break;
    case NavAction::left: dx = -cfg.step_size; break;
    case NavAction::right: dx = cfg.step_size; break;
    case NavAction::noop: break;
  }
  if (cfg.noise) {
    std::normal_distribution<Real> noise(0.0, cfg.noise_std);
    dx += noise(rng);
    dy += noise(rng);
  }
  return {std::clamp(pos.x + dx, 0.0, 1.0), std::clamp(pos.y + dy, 0.0, 1.0)};
}

}  // namespace nmrm
