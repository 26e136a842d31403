#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmrm/bag.hpp"
#include "nmrm/data/split.hpp"
#include "nmrm/mil/model.hpp"

namespace nmrm {

struct TrainConfig {
  Real learning_rate = 5e-4;
  Real weight_decay = 0.0;
  std::optional<Real> dropout;  // overrides the model's layer dropout when set
  int patience = 50;
  int max_epochs = 250;
  std::uint64_t seed = 0;
  // Targets are divided by this during optimisation; the head is rescaled
  // afterwards so the returned model predicts on label scale.
  Real label_scale = 1.0;
  bool fit_normaliser = true;
};

// Per-dataset defaults: toggle / push / dial and timer / moving / key / charger.
TrainConfig default_train_config(std::string_view task);

// Toy tasks use the small toy shape, navigation tasks the larger one.
ModelShape default_shape(std::string_view task);

struct EpochRecord {
  int epoch = 0;
  Real train_mse = 0.0;
  Real val_mse = 0.0;
  bool is_best = false;
};

struct TrainResult {
  MilModel model;  // parameters of the epoch with the lowest validation MSE
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  Real best_val_mse = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// One Adam step per training bag on (g' - G)^2, bags shuffled each epoch with
// seed + epoch. After each epoch the validation return MSE decides whether the
// snapshot is kept; training stops after `patience` epochs without
// improvement or at max_epochs. Throws NumericError naming epoch and bag on a
// non-finite loss.
TrainResult train(MilModel model, const std::vector<TrajectoryBag>& bags, const DatasetSplit& split,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Metrics {
  Real return_mse = 0.0;
  Real reward_mse = 0.0;
  Real return_sem = 0.0;
  Real reward_sem = 0.0;
  std::size_t count = 1;  // bags for a single evaluation, repeats for a summary
};

// Return MSE over bags and reward MSE over all steps against the oracle
// per-step rewards. Requires clean (non-noisy) labels.
Metrics evaluate(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                 const std::vector<std::size_t>& indices);
Metrics evaluate(const MilModel& model, const std::vector<TrajectoryBag>& bags);

// Return-only MSE against stored labels (noisy or not).
Real return_mse(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                const std::vector<std::size_t>& indices);

// Mean of each metric with sem = sample std / sqrt(n).
Metrics summarise(const std::vector<Metrics>& runs);

struct ExperimentConfig {
  ModelKind kind = ModelKind::csc_instance_space_lstm;
  ModelShape shape;
  TrainConfig train;
  Real noise = 0.0;
  int jobs = 1;
};

struct RepeatRun {
  std::uint64_t seed = 0;
  Metrics metrics;
  int best_epoch = 0;
  int epochs_run = 0;
  TrainResult result;
};

struct RepeatSummary {
  std::vector<RepeatRun> runs;
  Metrics summary;
};

// Seeds for repeat i of a run based at `base_seed`.
struct RepeatSeeds {
  std::uint64_t run, split, init, noise;
};
RepeatSeeds repeat_seeds(std::uint64_t base_seed, int repeat);

// Repeat i uses seed base_seed + i for its split, initialisation, noise and
// shuffling. With noise > 0 the train and validation labels are swapped
// (test labels stay clean). Repeats run on up to `jobs` threads.
RepeatSummary run_repeats(const std::vector<TrajectoryBag>& bags, const ExperimentConfig& config,
                          int repeats, std::uint64_t base_seed);

struct SweepRow {
  ModelKind kind;
  std::string task;
  Real noise;
  RepeatSummary result;
};

std::vector<SweepRow> robustness_sweep(const std::vector<TrajectoryBag>& bags,
                                       const std::vector<ModelKind>& kinds,
                                       const std::vector<Real>& noise_levels, const ExperimentConfig& base,
                                       int repeats, std::uint64_t base_seed);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);
void write_metrics_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace nmrm
