#include "nmrm/interp/interp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nmrm {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Real parse_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  Real v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("probe: cannot read " + what + " from '" + s + "'");
  }
  if (used != s.size()) throw FormatError("probe: trailing characters in " + what + " '" + s + "'");
  return v;
}

NavConfig quiet_nav() {
  NavConfig cfg;
  cfg.noise = false;
  return cfg;
}

const NavState kSpawnCentre = zones::kSpawnLeft.centre();

// Lattice steps between two coordinates, or throws if off-lattice.
int lattice_steps(Real from, Real to, Real step) {
  const Real n = (to - from) / step;
  const Real r = std::round(n);
  if (std::abs(n - r) > 1e-6)
    throw ContractError("probe: waypoint coordinate " + std::to_string(to) + " is not on the " +
                        std::to_string(step) + " lattice from " + std::to_string(from));
  return static_cast<int>(r);
}

void append_moves(std::vector<NavAction>& plan, int dx, int dy) {
  for (int i = 0; i < std::abs(dx); ++i) plan.push_back(dx > 0 ? NavAction::right : NavAction::left);
  for (int i = 0; i < std::abs(dy); ++i) plan.push_back(dy > 0 ? NavAction::up : NavAction::down);
}

}  // namespace

// ---- embeddings -------------------------------------------------------------

std::string state_category(TaskId task, const NavState& s, const HiddenState& h) {
  const bool in_treasure = zones::kTreasure.contains(s);
  switch (task) {
    case TaskId::timer: return in_treasure ? "In" : "Out";
    case TaskId::moving: {
      const Real edge = h[0];
      const bool inside = edge <= s.x && s.x <= edge + zones::kMovingWidth && zones::kTreasure.y0 <= s.y &&
                          s.y <= zones::kTreasure.y1;
      return std::string(inside ? "In" : "Out") + (h[1] < 0.0 ? "-Left" : "-Right");
    }
    case TaskId::key: return h[0] > 0.5 ? "Key" : "NoKey";
    case TaskId::charger:
      if (s.y <= zones::kChargerMaxY) return "Charging";
      return in_treasure ? "In" : "Out";
  }
  return "Out";
}

std::string temporal_category(TaskId task, const NavState& s, int t) {
  if (task == TaskId::key) {
    std::ostringstream os;
    os << s.x;
    return os.str();
  }
  return t <= 50 ? "t<=50" : "t>50";
}

std::vector<EmbeddingRow> export_embeddings(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                                            TaskId task) {
  require(model.has_lstm(), "export_embeddings: " + std::string(to_string(model.kind)) + " has no LSTM");
  require(model.hidden_size() == 2, "export_embeddings: needs a 2-dimensional hidden state");
  std::vector<EmbeddingRow> rows;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const TrajectoryBag& bag = bags[b];
    require(bag.hiddens.size() == bag.size(), "export_embeddings: bag is missing oracle hidden states");
    const Mat h = hidden_trace(model, bag);
    for (std::size_t t = 0; t < bag.size(); ++t) {
      const NavState s{bag.states[t].at(0), bag.states[t].at(1)};
      const HiddenState oh = HiddenState::from_vector(bag.hiddens[t]);
      const int step = static_cast<int>(t) + 1;
      const auto c = static_cast<Eigen::Index>(t);
      rows.push_back({b, step, h(0, c), h(1, c), state_category(task, s, oh), temporal_category(task, s, step)});
    }
  }
  return rows;
}

void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "bag,t,h1,h2,state,temporal\n";
  for (const auto& r : rows)
    out << r.bag << ',' << r.t << ',' << r.h1 << ',' << r.h2 << ',' << r.state << ',' << r.temporal << '\n';
}

// ---- probes -----------------------------------------------------------------

ProbeSpec parse_probe(std::string_view text) {
  const auto parts = split(text, ';');
  ProbeSpec spec;
  spec.name = parts.front();
  if (spec.name.empty()) throw FormatError("probe: missing name");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p.empty()) continue;
    // "x,y xN" or "x,y" (hold 0); spaces may follow the comma
    std::string coords = p;
    int hold = 0;
    const auto space = p.find_last_of(" \t");
    if (space != std::string::npos && p.find(',', space) == std::string::npos) {
      coords = trim(p.substr(0, space));
      const std::string rep = trim(p.substr(space));
      if (rep.size() < 2 || (rep[0] != 'x' && rep[0] != 'X'))
        throw FormatError("probe: expected 'xN' after waypoint, got '" + rep + "'");
      const Real n = parse_real(rep.substr(1), "repeat count");
      if (n < 0 || n != std::floor(n)) throw FormatError("probe: repeat count must be a non-negative integer");
      hold = static_cast<int>(n);
    }
    const auto xy = split(coords, ',');
    if (xy.size() != 2) throw FormatError("probe: waypoint '" + coords + "' is not 'x,y'");
    Waypoint w{parse_real(xy[0], "x"), parse_real(xy[1], "y"), hold};
    if (w.x < 0.0 || w.x > 1.0 || w.y < 0.0 || w.y > 1.0)
      throw FormatError("probe: waypoint '" + coords + "' lies outside [0,1]^2");
    spec.waypoints.push_back(w);
  }
  if (spec.waypoints.empty()) throw FormatError("probe '" + spec.name + "' has no waypoints");
  return spec;
}

std::string format_probe(const ProbeSpec& spec) {
  std::ostringstream os;
  os << spec.name;
  for (const auto& w : spec.waypoints) os << "; " << w.x << ',' << w.y << " x" << w.hold;
  return os.str();
}

namespace {

struct Preset {
  const char* name;
  const char* text;
};

// Charger: 3 steps down into the strip, k charging no-ops, 4 right and 5 up
// into the treasure, then stay. k = 41 maximises 0.02 (k + 5) (88 - k).
constexpr Preset kPresets[] = {
    {"charger_optimal", "charger_optimal; 0.1,0.55 x0; 0.1,0.25 x41; 0.5,0.75 x47"},
    {"charger_overcharged", "charger_overcharged; 0.1,0.55 x0; 0.1,0.25 x60; 0.5,0.75 x28"},
    {"charger_undercharged", "charger_undercharged; 0.1,0.55 x0; 0.1,0.25 x10; 0.5,0.75 x78"},
    {"key_optimal", "key_optimal; 0.1,0.55 x0; 0.5,0.25 x0; 0.5,0.75 x88"},
    {"key_skip", "key_skip; 0.1,0.55 x0; 0.5,0.75 x94"},
    {"timer_hold", "timer_hold; 0.1,0.55 x0; 0.5,0.75 x94"},
    {"timer_late", "timer_late; 0.1,0.55 x50; 0.5,0.75 x44"},
    {"moving_wait", "moving_wait; 0.1,0.55 x0; 0.5,0.75 x94"},
};

}  // namespace

std::vector<std::string> probe_preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

ProbeSpec probe_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (name == p.name) return parse_probe(p.text);
  throw ContractError("unknown probe preset '" + std::string(name) + "'");
}

std::vector<NavAction> compile_probe(const ProbeSpec& spec, const OracleTask& task) {
  require(!spec.waypoints.empty(), "compile_probe: no waypoints");
  const Real step = NavConfig{}.step_size;
  std::vector<NavAction> plan;
  Waypoint here = spec.waypoints.front();
  for (std::size_t i = 0; i < spec.waypoints.size(); ++i) {
    const Waypoint& w = spec.waypoints[i];
    append_moves(plan, lattice_steps(here.x, w.x, step), lattice_steps(here.y, w.y, step));
    plan.insert(plan.end(), static_cast<std::size_t>(w.hold), NavAction::noop);
    here = w;
  }
  if (static_cast<int>(plan.size()) > task.episode_length())
    throw ContractError("compile_probe: '" + spec.name + "' needs " + std::to_string(plan.size()) +
                        " steps, episode has " + std::to_string(task.episode_length()));
  require(!plan.empty(), "compile_probe: '" + spec.name + "' compiles to no steps");
  return plan;
}

ProbeTrace run_probe(const MilModel& model, const OracleTask& task, const ProbeSpec& spec, bool noise,
                     std::uint64_t seed) {
  ProbeTrace tr;
  tr.name = spec.name;
  tr.actions = compile_probe(spec, task);
  NavConfig cfg;
  cfg.noise = noise;
  const NavState start{spec.waypoints.front().x, spec.waypoints.front().y};
  const TrajectoryBag bag = rollout_from(task, start, tr.actions, seed, cfg);
  for (std::size_t t = 0; t < bag.size(); ++t) {
    tr.states.push_back({bag.states[t][0], bag.states[t][1]});
    tr.oracle_hidden.push_back(HiddenState::from_vector(bag.hiddens[t]));
  }
  tr.oracle_rewards = bag.rewards;
  tr.oracle_return = bag.bag_return;
  const PredictionTrace p = predict(model, bag);
  tr.model_hidden = p.hiddens;
  tr.model_rewards = p.rewards;
  tr.model_return = p.bag_return;
  return tr;
}

void write_probe_csv(const ProbeTrace& tr, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,x,y,action,oracle_h1,oracle_h2,oracle_reward,model_h1,model_h2,model_reward\n";
  for (std::size_t t = 0; t < tr.actions.size(); ++t) {
    const HiddenState& h = tr.oracle_hidden[t];
    out << t + 1 << ',' << tr.states[t].x << ',' << tr.states[t].y << ',' << to_string(tr.actions[t]) << ','
        << h[0] << ',';
    if (h.dim > 1) out << h[1];
    out << ',' << tr.oracle_rewards[t] << ',';
    const auto c = static_cast<Eigen::Index>(t);
    if (tr.model_hidden.rows() >= 1) out << tr.model_hidden(0, c);
    out << ',';
    if (tr.model_hidden.rows() >= 2) out << tr.model_hidden(1, c);
    out << ',' << tr.model_rewards[t] << '\n';
  }
}

// ---- reward grids -----------------------------------------------------------

std::vector<NavAction> context_prefix(const OracleTask& task, Real context) {
  const int limit = task.episode_length() - 1;  // leave room for the query step
  auto whole = [&](const char* what) {
    if (context < 0.0 || context != std::floor(context) || context > limit)
      throw ContractError(std::string("reward_grid: ") + what + " context must be an integer in [0, " +
                          std::to_string(limit) + "], got " + std::to_string(context));
    return static_cast<std::size_t>(context);
  };
  switch (task.id()) {
    case TaskId::timer:
      return std::vector<NavAction>(whole("timer"), NavAction::noop);
    case TaskId::moving:
      return std::vector<NavAction>(whole("moving"), NavAction::noop);
    case TaskId::key: {
      if (context != 0.0 && context != 1.0) throw ContractError("reward_grid: key context must be 0 or 1");
      // 4 right, 3 down onto the key, one no-op to pick it up; the 0 context
      // waits at the spawn centre for as long.
      std::vector<NavAction> p;
      if (context == 1.0) {
        append_moves(p, 4, -3);
        p.push_back(NavAction::noop);
      } else {
        p.assign(8, NavAction::noop);
      }
      return p;
    }
    case TaskId::charger: {
      if (context < 0.0 || context > 1.0) throw ContractError("reward_grid: charger context must lie in [0, 1]");
      const auto k = static_cast<std::size_t>(std::lround(context / 0.02));
      std::vector<NavAction> p(3, NavAction::down);  // 0.55 -> 0.25, inside the strip
      p.insert(p.end(), k, NavAction::noop);
      if (static_cast<int>(p.size()) > limit) throw ContractError("reward_grid: charger context unreachable");
      return p;
    }
  }
  return {};
}

std::vector<GridCell> reward_grid(const MilModel& model, const OracleTask& task, const GridSpec& spec) {
  require(spec.resolution >= 2, "reward_grid: resolution must be at least 2");
  require(!spec.contexts.empty(), "reward_grid: no contexts given");
  require(model.feature_dim == 2, "reward_grid: model must take 2-dimensional states");
  std::vector<GridCell> cells;
  cells.reserve(spec.contexts.size() * static_cast<std::size_t>(spec.resolution * spec.resolution));
  for (Real ctx : spec.contexts) {
    const auto prefix = context_prefix(task, ctx);
    // Noise-free prefix through both the oracle and the model.
    HiddenState h = task.initial_hidden();
    ModelStepper stepper(model);
    NavState s = kSpawnCentre;
    Rng unused(0);
    for (NavAction a : prefix) {
      h = task.update(h, s, a);
      Vec raw(2);
      raw << s.x, s.y;
      stepper.step(raw);
      s = nav_step(s, a, unused, quiet_nav());
    }
    for (int i = 0; i < spec.resolution; ++i) {
      for (int j = 0; j < spec.resolution; ++j) {
        const NavState q{static_cast<Real>(i) / (spec.resolution - 1), static_cast<Real>(j) / (spec.resolution - 1)};
        ModelStepper probe = stepper;
        Vec raw(2);
        raw << q.x, q.y;
        GridCell cell;
        cell.x = q.x;
        cell.y = q.y;
        cell.context = ctx;
        cell.model_reward = probe.step(raw);
        cell.oracle_reward = task.update_and_reward(h, q, NavAction::noop).second;
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

void write_grid_csv(const std::vector<GridCell>& cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "x,y,context,model_reward,oracle_reward\n";
  for (const auto& c : cells)
    out << c.x << ',' << c.y << ',' << c.context << ',' << c.model_reward << ',' << c.oracle_reward << '\n';
}

}  // namespace nmrm
