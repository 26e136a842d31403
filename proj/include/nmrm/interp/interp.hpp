#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nmrm/envs/oracle.hpp"
#include "nmrm/mil/model.hpp"

namespace nmrm {

// ---- hidden-state embeddings ------------------------------------------------

struct EmbeddingRow {
  std::size_t bag = 0;
  int t = 0;  // steps consumed, 1-based
  Real h1 = 0.0, h2 = 0.0;
  std::string state;     // environment-state category
  std::string temporal;  // time bucket, or the x position for key
};

// Category of the step that produced hidden state h_t:
//   timer    In / Out of the treasure
//   moving   In / Out of the moving treasure, plus Left / Right (its velocity)
//   key      NoKey / Key
//   charger  In / Out of the treasure, Charging inside the charger strip
std::string state_category(TaskId task, const NavState& s, const HiddenState& h_after);
std::string temporal_category(TaskId task, const NavState& s, int t);

// One row per step per bag. Requires an LSTM model with hidden size 2.
std::vector<EmbeddingRow> export_embeddings(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                                            TaskId task);
void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::filesystem::path& path);

// ---- probes -----------------------------------------------------------------

struct Waypoint {
  Real x = 0.0, y = 0.0;
  int hold = 0;  // no-op steps spent at the waypoint after arriving
};

// Text form: "name; x,y xN; x,y xN; ...". The first waypoint is the start.
struct ProbeSpec {
  std::string name;
  std::vector<Waypoint> waypoints;
};

ProbeSpec parse_probe(std::string_view text);
std::string format_probe(const ProbeSpec& spec);

// Hand-written presets (approximate probe routes, not measured ones).
std::vector<std::string> probe_preset_names();
ProbeSpec probe_preset(std::string_view name);

// Axis-aligned plan: from each waypoint, x moves first, then y moves, then
// the hold. Throws ContractError for off-lattice waypoints or plans longer
// than the episode.
std::vector<NavAction> compile_probe(const ProbeSpec& spec, const OracleTask& task);

struct ProbeTrace {
  std::string name;
  std::vector<NavAction> actions;
  std::vector<NavState> states;
  std::vector<HiddenState> oracle_hidden;  // after each step's update
  std::vector<Real> oracle_rewards;
  Mat model_hidden;  // H x T, empty for instance_space_nn
  std::vector<Real> model_rewards;
  Real oracle_return = 0.0;
  Real model_return = 0.0;
};

// Noise is off unless `noise` is set; then motion noise is drawn from `seed`.
ProbeTrace run_probe(const MilModel& model, const OracleTask& task, const ProbeSpec& spec, bool noise = false,
                     std::uint64_t seed = 0);
void write_probe_csv(const ProbeTrace& trace, const std::filesystem::path& path);

// ---- reward grids -----------------------------------------------------------

struct GridSpec {
  int resolution = 21;           // points per axis over [0,1]
  std::vector<Real> contexts;    // timer/moving: steps elapsed; key: 0/1; charger: charge level
};

struct GridCell {
  Real x = 0.0, y = 0.0, context = 0.0;
  Real model_reward = 0.0, oracle_reward = 0.0;
};

// A prefix starting from the left spawn centre puts the oracle in the
// requested hidden context; the model then sees the same prefix and the
// query position as its next state.
std::vector<NavAction> context_prefix(const OracleTask& task, Real context);
std::vector<GridCell> reward_grid(const MilModel& model, const OracleTask& task, const GridSpec& spec);
void write_grid_csv(const std::vector<GridCell>& cells, const std::filesystem::path& path);

}  // namespace nmrm
