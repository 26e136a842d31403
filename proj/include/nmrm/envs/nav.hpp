#pragma once

#include <array>
#include <string_view>

#include "nmrm/common.hpp"

namespace nmrm {

// Agent position, always inside [0,1]^2.
struct NavState {
  Real x = 0.0;
  Real y = 0.0;

  friend bool operator==(const NavState&, const NavState&) = default;
};

enum class NavAction : int { up = 0, down = 1, left = 2, right = 3, noop = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<NavAction, kNumActions> kAllActions = {
    NavAction::up, NavAction::down, NavAction::left, NavAction::right, NavAction::noop};

std::string_view to_string(NavAction a);
NavAction action_from_index(int index);

struct NavConfig {
  Real step_size = 0.1;
  Real noise_std = 0.02;
  bool noise = true;
};

// Closed axis-aligned rectangle.
struct Rect {
  Real x0, x1, y0, y1;

  bool contains(const NavState& s) const { return x0 <= s.x && s.x <= x1 && y0 <= s.y && s.y <= y1; }
  NavState centre() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

// Moves step_size in the action direction, adds N(0, noise_std^2) to each
// axis (when noise is on), then clips into [0,1]^2.
NavState nav_step(const NavState& pos, NavAction action, Rng& rng, const NavConfig& cfg = {});

}  // namespace nmrm
