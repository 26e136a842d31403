#include "nmrm/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "nmrm/data/toy.hpp"
#include "nmrm/numeric/adam.hpp"
#include "nmrm/numeric/params.hpp"
#include "nmrm/parallel.hpp"

namespace nmrm {

TrainConfig default_train_config(std::string_view task) {
  TrainConfig c;
  if (task == "toggle") {
    c.learning_rate = 1e-4;
    c.weight_decay = 1e-5;
    c.patience = 20;
    c.max_epochs = 100;
  } else if (task == "push" || task == "dial") {
    c.learning_rate = 1e-3;
    c.patience = 30;
    c.max_epochs = 150;
  } else if (task == "key") {
    c.learning_rate = 5e-4;
    c.dropout = 0.1;
    c.patience = 30;
    c.max_epochs = 150;
  } else if (task == "timer" || task == "moving" || task == "charger") {
    c.learning_rate = 5e-4;
    c.dropout = 0.1;
    c.patience = 50;
    c.max_epochs = 250;
  } else {
    throw ContractError("no default training config for task '" + std::string(task) + "'");
  }
  return c;
}

ModelShape default_shape(std::string_view task) {
  return is_toy_name(task) ? toy_shape() : nav_shape();
}

Real return_mse(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                const std::vector<std::size_t>& indices) {
  require(!indices.empty(), "return_mse: no bags");
  Real total = 0.0;
  for (std::size_t i : indices) {
    const Real e = predict_return(model, feature_matrix(bags.at(i))) - bags[i].bag_return;
    total += e * e;
  }
  return total / static_cast<Real>(indices.size());
}

TrainResult train(MilModel model, const std::vector<TrajectoryBag>& bags, const DatasetSplit& split,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  require(!split.train.empty() && !split.validation.empty(), "train: empty train or validation split");
  require(config.max_epochs >= 1, "train: max_epochs must be at least 1");
  require(config.patience >= 1 && config.patience <= config.max_epochs,
          "train: patience must lie in [1, max_epochs]");
  require(config.label_scale > 0.0, "train: label_scale must be positive");
  for (std::size_t i : split.train)
    require(bags.at(i).feature_dim() == model.feature_dim, "train: bag feature dimension does not match model");

  if (config.dropout) set_dropout(model, *config.dropout);
  if (config.fit_normaliser) model.normaliser = fit_normaliser(bags, split.train);

  // Features are fixed for the whole run.
  std::vector<Mat> features(bags.size());
  for (std::size_t i : split.train) features[i] = feature_matrix(bags[i]);
  for (std::size_t i : split.validation) features[i] = feature_matrix(bags[i]);

  const Real scale = config.label_scale;
  auto validation_mse = [&](const MilModel& m) {
    Real total = 0.0;
    for (std::size_t i : split.validation) {
      const Real e = predict_return(m, features[i]) * scale - bags[i].bag_return;
      total += e * e;
    }
    return total / static_cast<Real>(split.validation.size());
  };

  Vec params = flatten_params(model);
  Vec grad_flat(params.size());
  AdamState adam(params.size(), AdamConfig{config.learning_rate, config.weight_decay});
  Rng dropout_rng(mix_seed(config.seed, 0xd409));

  TrainResult result;
  result.model = model;
  result.best_val_mse = std::numeric_limits<Real>::infinity();
  int since_best = 0;
  std::vector<std::size_t> order = split.train;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng(config.seed + static_cast<std::uint64_t>(epoch));
    order = split.train;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    Real train_total = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = order[k];
      GradientResult g;
      try {
        g = bptt_gradients(model, features[i], bags[i].bag_return / scale, true, &dropout_rng);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", bag " + std::to_string(i) + ": " +
                           e.what());
      }
      train_total += g.loss;
      flatten_params_into(g.grad, grad_flat);
      adam_update(params, grad_flat, adam);
      assign_params(model, params);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = train_total / static_cast<Real>(order.size()) * scale * scale;
    rec.val_mse = validation_mse(model);
    if (!std::isfinite(rec.val_mse))
      throw NumericError("train: epoch " + std::to_string(epoch) + ": non-finite validation loss");
    if (rec.val_mse < result.best_val_mse) {
      rec.is_best = true;
      result.best_val_mse = rec.val_mse;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_best >= config.patience) break;
  }

  if (scale != 1.0) {
    result.model.hn.back().weights *= scale;
    result.model.hn.back().bias *= scale;
  }
  return result;
}

Metrics evaluate(const MilModel& model, const std::vector<TrajectoryBag>& bags,
                 const std::vector<std::size_t>& indices) {
  require(!indices.empty(), "evaluate: empty test set");
  Real ret = 0.0, rew = 0.0;
  std::size_t steps = 0;
  for (std::size_t i : indices) {
    const TrajectoryBag& bag = bags.at(i);
    require(!bag.noisy, "evaluate: test bags must carry clean labels");
    const PredictionTrace trace = predict(model, bag);
    const Real e = trace.bag_return - bag.bag_return;
    ret += e * e;
    for (std::size_t t = 0; t < bag.size(); ++t) {
      const Real d = trace.rewards[t] - bag.rewards[t];
      rew += d * d;
    }
    steps += bag.size();
  }
  Metrics m;
  m.return_mse = ret / static_cast<Real>(indices.size());
  m.reward_mse = rew / static_cast<Real>(steps);
  m.count = indices.size();
  return m;
}

Metrics evaluate(const MilModel& model, const std::vector<TrajectoryBag>& bags) {
  std::vector<std::size_t> all(bags.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return evaluate(model, bags, all);
}

Metrics summarise(const std::vector<Metrics>& runs) {
  require(!runs.empty(), "summarise: no runs");
  const auto n = static_cast<Real>(runs.size());
  Metrics s;
  s.count = runs.size();
  for (const auto& r : runs) {
    s.return_mse += r.return_mse / n;
    s.reward_mse += r.reward_mse / n;
  }
  if (runs.size() >= 2) {
    Real vr = 0.0, vw = 0.0;
    for (const auto& r : runs) {
      vr += (r.return_mse - s.return_mse) * (r.return_mse - s.return_mse);
      vw += (r.reward_mse - s.reward_mse) * (r.reward_mse - s.reward_mse);
    }
    s.return_sem = std::sqrt(vr / (n - 1.0)) / std::sqrt(n);
    s.reward_sem = std::sqrt(vw / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

RepeatSeeds repeat_seeds(std::uint64_t base_seed, int repeat) {
  const std::uint64_t run = base_seed + static_cast<std::uint64_t>(repeat);
  return {run, mix_seed(run, 1), mix_seed(run, 2), mix_seed(run, 3)};
}

RepeatSummary run_repeats(const std::vector<TrajectoryBag>& bags, const ExperimentConfig& config,
                          int repeats, std::uint64_t base_seed) {
  require(repeats >= 1, "run_repeats: need at least one repeat");
  require(!bags.empty(), "run_repeats: empty dataset");
  RepeatSummary out;
  out.runs.resize(static_cast<std::size_t>(repeats));
  parallel_for(out.runs.size(), config.jobs, [&](std::size_t r) {
    const RepeatSeeds seeds = repeat_seeds(base_seed, static_cast<int>(r));
    const DatasetSplit split = split_dataset(bags.size(), seeds.split);
    std::vector<TrajectoryBag> working = bags;
    if (config.noise > 0.0) {
      std::vector<std::size_t> labelled = split.train;
      labelled.insert(labelled.end(), split.validation.begin(), split.validation.end());
      apply_label_noise(working, labelled, config.noise, seeds.noise);
    }
    TrainConfig tc = config.train;
    tc.seed = seeds.run;
    MilModel model = build_model(config.kind, bags.front().feature_dim(), seeds.init, config.shape);
    RepeatRun& run = out.runs[r];
    run.seed = seeds.run;
    run.result = train(std::move(model), working, split, tc);
    run.metrics = evaluate(run.result.model, working, split.test);
    run.best_epoch = run.result.best_epoch;
    run.epochs_run = static_cast<int>(run.result.history.size());
  });
  std::vector<Metrics> all;
  for (const auto& r : out.runs) all.push_back(r.metrics);
  out.summary = summarise(all);
  return out;
}

std::vector<SweepRow> robustness_sweep(const std::vector<TrajectoryBag>& bags,
                                       const std::vector<ModelKind>& kinds,
                                       const std::vector<Real>& noise_levels, const ExperimentConfig& base,
                                       int repeats, std::uint64_t base_seed) {
  require(!bags.empty(), "robustness_sweep: empty dataset");
  for (Real nu : noise_levels) require(nu >= 0.0 && nu <= 0.5, "robustness_sweep: noise levels must lie in [0, 0.5]");
  std::vector<SweepRow> rows;
  for (ModelKind k : kinds) {
    for (Real nu : noise_levels) {
      ExperimentConfig cfg = base;
      cfg.kind = k;
      cfg.noise = nu;
      rows.push_back({k, bags.front().task, nu, run_repeats(bags, cfg, repeats, base_seed)});
    }
  }
  return rows;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  return out;
}

}  // namespace

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "epoch,train_mse,val_mse,is_best\n";
  for (const auto& r : history) out << r.epoch << ',' << r.train_mse << ',' << r.val_mse << ',' << (r.is_best ? 1 : 0) << '\n';
}

void write_metrics_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "kind,task,noise,return_mse,return_sem,reward_mse,reward_sem,repeats\n";
  for (const auto& r : rows) {
    const Metrics& m = r.result.summary;
    out << to_string(r.kind) << ',' << r.task << ',' << r.noise << ',' << m.return_mse << ',' << m.return_sem << ','
        << m.reward_mse << ',' << m.reward_sem << ',' << m.count << '\n';
  }
}

}  // namespace nmrm
