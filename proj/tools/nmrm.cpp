#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmrm/data/generate.hpp"
#include "nmrm/data/jsonl.hpp"
#include "nmrm/data/split.hpp"
#include "nmrm/data/toy.hpp"
#include "nmrm/interp/interp.hpp"
#include "nmrm/mil/checkpoint.hpp"
#include "nmrm/mil/grad_suite.hpp"
#include "nmrm/parallel.hpp"
#include "nmrm/rl/dqn.hpp"
#include "nmrm/train/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nmrm;

namespace {

// Every subcommand reads from one of these. Unset optionals fall back to the
// per-task training defaults.
struct Options {
  std::string out_root;
  std::string task = "timer";
  std::string model = "csc";
  std::uint64_t seed = 1;
  int jobs = 1;

  std::string data;
  std::size_t n = 5000;
  std::uint64_t data_seed = 1;
  bool no_motion_noise = false;

  std::optional<double> lr, weight_decay, dropout;
  std::optional<int> patience, epochs;
  double label_scale = 1.0;
  double noise = 0.0;
  int repeats = 10;
  std::vector<std::string> models = {"nn", "embedding", "instance", "csc"};
  std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  bool verbose = false;

  std::string checkpoint;
  std::string subset = "all";
  std::vector<std::string> presets;
  std::string probe_text;
  bool probe_noise = false;
  int resolution = 21;
  std::vector<double> contexts;

  std::string reward_source = "oracle_with_hidden";
  int seeds = 1;
  int episodes = 400;
  std::vector<long> hidden = {256, 128, 64};
  std::size_t buffer = 50000;
  std::size_t batch = 128;
  double gamma = 0.99, rl_lr = 1e-3, polyak = 5e-3;
  bool single_q = false;
  int eps_decay = 200;
  int eval_episodes = 100;
  int tail = 50;

  int draws = 20;
  int max_bag_length = 10;
  double eps = 1e-6, param_scale = 2.0, tolerance = 1e-4;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path output_root(const Options& o) {
  if (!o.out_root.empty()) return o.out_root;
  if (const char* env = std::getenv("NMRM_OUT"); env && *env) return env;
  return "out";
}

fs::path run_dir(const Options& o, const std::string& command, const std::string& task, const std::string& kind) {
  fs::path dir = output_root(o) / command / task / kind / std::to_string(o.seed);
  fs::create_directories(dir);
  return dir;
}

// manifest.json carries the full config echo; config.ini is the same echo in
// a form --config accepts, so a run can be repeated from its directory.
void write_manifest(const fs::path& dir, const CLI::App& sub, const std::vector<std::string>& argv, const json& extra) {
  const std::string ini = "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false);
  std::ofstream(dir / "config.ini") << ini;
  json m;
  m["command"] = sub.get_name();
  m["argv"] = argv;
  m["config"] = ini;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

TrainConfig train_config(const Options& o) {
  TrainConfig tc = default_train_config(o.task);
  if (o.lr) tc.learning_rate = *o.lr;
  if (o.weight_decay) tc.weight_decay = *o.weight_decay;
  if (o.dropout) tc.dropout = *o.dropout;
  if (o.patience) tc.patience = *o.patience;
  if (o.epochs) tc.max_epochs = *o.epochs;
  if (!o.patience) tc.patience = std::min(tc.patience, tc.max_epochs);
  tc.label_scale = o.label_scale;
  return tc;
}

json train_config_json(const TrainConfig& tc) {
  return {{"learning_rate", tc.learning_rate},
          {"weight_decay", tc.weight_decay},
          {"dropout", tc.dropout ? json(*tc.dropout) : json(nullptr)},
          {"patience", tc.patience},
          {"max_epochs", tc.max_epochs},
          {"label_scale", tc.label_scale}};
}

json metrics_json(const Metrics& m) {
  return {{"return_mse", m.return_mse},
          {"return_sem", m.return_sem},
          {"reward_mse", m.reward_mse},
          {"reward_sem", m.reward_sem},
          {"count", m.count}};
}

// Loads --data when given, otherwise generates the task's dataset from
// --data-seed. The returned json describes the source for the manifest.
std::vector<TrajectoryBag> load_or_generate(const Options& o, json& source) {
  if (!o.data.empty()) {
    source = {{"path", fs::absolute(o.data).string()}};
    return load_dataset(o.data);
  }
  source = {{"generated", true}, {"task", o.task}, {"n", o.n}, {"data_seed", o.data_seed}};
  if (is_toy_name(o.task)) return gen_toy_dataset(parse_toy(o.task), o.n, o.data_seed);
  const OracleTask task(parse_task(o.task));
  GenerateOptions gen;
  gen.jobs = o.jobs;
  gen.nav.noise = !o.no_motion_noise;
  source["motion_noise"] = gen.nav.noise;
  return generate_dataset(task, o.n, default_class_limits(task.id()), o.data_seed, gen).bags;
}

ExperimentConfig experiment_config(const Options& o, ModelKind kind) {
  ExperimentConfig ec;
  ec.kind = kind;
  ec.shape = default_shape(o.task);
  ec.train = train_config(o);
  ec.noise = o.noise;
  ec.jobs = o.jobs;
  return ec;
}

std::vector<ModelKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ModelKind> kinds;
  for (const auto& n : names) {
    if (n == "all") return {kAllModelKinds.begin(), kAllModelKinds.end()};
    kinds.push_back(parse_model_kind(n));
  }
  return kinds;
}

std::string kinds_label(const std::vector<ModelKind>& kinds) {
  if (kinds.size() == kAllModelKinds.size()) return "all";
  std::string s;
  for (ModelKind k : kinds) s += (s.empty() ? "" : "+") + std::string(short_name(k));
  return s;
}

std::vector<Real> default_contexts(TaskId task) {
  switch (task) {
    case TaskId::timer:
    case TaskId::moving: return {10.0, 60.0};
    case TaskId::key: return {0.0, 1.0};
    case TaskId::charger: return {0.0, 0.2, 0.4, 0.6};
  }
  return {};
}

// ---- subcommands -------------------------------------------------------------

int cmd_gen_data(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  require(!is_toy_name(o.task), "gen-data: '" + o.task + "' is a toy dataset; use gen-toy");
  const OracleTask task(parse_task(o.task));
  const auto t0 = Clock::now();
  GenerateOptions gen;
  gen.jobs = o.jobs;
  gen.nav.noise = !o.no_motion_noise;
  const ClassLimits limits = default_class_limits(task.id());
  const GeneratedDataset ds = generate_dataset(task, o.n, limits, o.seed, gen);
  const fs::path dir = run_dir(o, "gen-data", o.task, "data");
  save_dataset(ds.bags, dir / "dataset.jsonl");

  std::ofstream hist(dir / "histogram.csv");
  hist << "class,description,count,cap\n";
  int worst_slack = 1 << 30;
  for (const auto& [id, count] : ds.histogram) {
    const int cap = class_cap(limits, id, o.n);
    worst_slack = std::min(worst_slack, cap - count);
    hist << id << ',' << describe_class(task.id(), id) << ',' << count << ',' << cap << '\n';
  }
  std::cout << "gen-data " << o.task << ": " << ds.bags.size() << " bags from " << ds.attempts << " candidates, "
            << ds.histogram.size() << " classes occupied (" << limits.description << ")\n";
  for (const auto& [id, count] : ds.histogram)
    if (ds.histogram.size() <= 10)
      std::cout << "  " << describe_class(task.id(), id) << ": " << count << " / cap " << class_cap(limits, id, o.n)
                << '\n';
  std::cout << "wrote " << (dir / "dataset.jsonl").string() << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", {{"data", o.seed}}},
                  {"attempts", ds.attempts},
                  {"classes", ds.histogram.size()},
                  {"caps_respected", worst_slack >= 0},
                  {"seconds", seconds_since(t0)}});
  return worst_slack >= 0 ? 0 : 1;
}

int cmd_gen_toy(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const ToyKind kind = parse_toy(o.task);
  const auto bags = gen_toy_dataset(kind, o.n, o.seed);
  const fs::path dir = run_dir(o, "gen-toy", o.task, "data");
  save_dataset(bags, dir / "dataset.jsonl");
  Real mean = 0.0;
  for (const auto& b : bags) mean += b.bag_return;
  mean /= static_cast<Real>(std::max<std::size_t>(1, bags.size()));
  std::cout << "gen-toy " << o.task << ": " << bags.size() << " bags, mean return " << mean << "\nwrote "
            << (dir / "dataset.jsonl").string() << '\n';
  write_manifest(dir, sub, argv, {{"seeds", {{"data", o.seed}}}, {"mean_return", mean}});
  return 0;
}

int cmd_train(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const ModelKind kind = parse_model_kind(o.model);
  json source;
  const auto bags = load_or_generate(o, source);
  ExperimentConfig ec = experiment_config(o, kind);
  ec.jobs = 1;
  const auto t0 = Clock::now();
  if (o.verbose) std::cerr << "training " << to_string(kind) << " on " << bags.size() << " bags\n";
  const RepeatSummary rs = run_repeats(bags, ec, 1, o.seed);
  const RepeatRun& run = rs.runs.front();
  const fs::path dir = run_dir(o, "train", o.task, std::string(short_name(kind)));
  save_checkpoint(run.result.model, dir / "checkpoint.json");
  write_history_csv(run.result.history, dir / "history.csv");
  const RepeatSeeds seeds = repeat_seeds(o.seed, 0);
  std::cout << "train " << o.task << '/' << short_name(kind) << ": best epoch " << run.best_epoch << " of "
            << run.epochs_run << ", val MSE " << run.result.best_val_mse << ", test return MSE "
            << run.metrics.return_mse << ", reward MSE " << run.metrics.reward_mse << "\nwrote "
            << (dir / "checkpoint.json").string() << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", {{"run", seeds.run}, {"split", seeds.split}, {"init", seeds.init}, {"noise", seeds.noise}}},
                  {"data", source},
                  {"train_config", train_config_json(ec.train)},
                  {"best_epoch", run.best_epoch},
                  {"epochs_run", run.epochs_run},
                  {"best_val_mse", run.result.best_val_mse},
                  {"test", metrics_json(run.metrics)},
                  {"seconds", seconds_since(t0)}});
  return 0;
}

int cmd_eval(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  require(!o.checkpoint.empty(), "eval: --checkpoint is required");
  const MilModel model = load_checkpoint(o.checkpoint);
  json source;
  const auto bags = load_or_generate(o, source);
  std::vector<std::size_t> indices;
  if (o.subset == "all") {
    for (std::size_t i = 0; i < bags.size(); ++i) indices.push_back(i);
  } else {
    const DatasetSplit split = split_dataset(bags.size(), repeat_seeds(o.seed, 0).split);
    if (o.subset == "test") indices = split.test;
    else if (o.subset == "validation") indices = split.validation;
    else if (o.subset == "train") indices = split.train;
    else throw ContractError("eval: --subset must be all, train, validation or test");
  }
  const Metrics m = evaluate(model, bags, indices);
  const fs::path dir = run_dir(o, "eval", o.task, std::string(short_name(model.kind)));
  std::cout << "eval " << o.task << '/' << short_name(model.kind) << " on " << indices.size() << " bags (" << o.subset
            << "): return MSE " << m.return_mse << ", reward MSE " << m.reward_mse << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", {{"split", repeat_seeds(o.seed, 0).split}}},
                  {"checkpoint", fs::absolute(o.checkpoint).string()},
                  {"data", source},
                  {"subset", o.subset},
                  {"metrics", metrics_json(m)}});
  return 0;
}

int cmd_repeats(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const ModelKind kind = parse_model_kind(o.model);
  json source;
  const auto bags = load_or_generate(o, source);
  const ExperimentConfig ec = experiment_config(o, kind);
  const auto t0 = Clock::now();
  const RepeatSummary rs = run_repeats(bags, ec, o.repeats, o.seed);
  const fs::path dir = run_dir(o, "repeats", o.task, std::string(short_name(kind)));
  std::ofstream runs(dir / "runs.csv");
  runs.precision(17);
  runs << "repeat,seed,return_mse,reward_mse,best_epoch,epochs_run\n";
  json seeds = json::array();
  for (std::size_t i = 0; i < rs.runs.size(); ++i) {
    const RepeatRun& r = rs.runs[i];
    runs << i << ',' << r.seed << ',' << r.metrics.return_mse << ',' << r.metrics.reward_mse << ',' << r.best_epoch
         << ',' << r.epochs_run << '\n';
    const fs::path rd = dir / ("repeat_" + std::to_string(i));
    save_checkpoint(r.result.model, rd / "checkpoint.json");
    write_history_csv(r.result.history, rd / "history.csv");
    const RepeatSeeds s = repeat_seeds(o.seed, static_cast<int>(i));
    seeds.push_back({{"run", s.run}, {"split", s.split}, {"init", s.init}, {"noise", s.noise}});
  }
  const Metrics& m = rs.summary;
  std::cout << "repeats " << o.task << '/' << short_name(kind) << " x" << o.repeats << ": return MSE " << m.return_mse
            << " +/- " << m.return_sem << ", reward MSE " << m.reward_mse << " +/- " << m.reward_sem << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", seeds},
                  {"data", source},
                  {"train_config", train_config_json(ec.train)},
                  {"noise", o.noise},
                  {"summary", metrics_json(m)},
                  {"seconds", seconds_since(t0)}});
  return 0;
}

int cmd_robustness(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const auto kinds = parse_kinds(o.models);
  json source;
  const auto bags = load_or_generate(o, source);
  const ExperimentConfig base = experiment_config(o, kinds.front());
  const auto t0 = Clock::now();
  const auto rows = robustness_sweep(bags, kinds, o.noise_levels, base, o.repeats, o.seed);
  const fs::path dir = run_dir(o, "robustness", o.task, kinds_label(kinds));
  write_metrics_csv(rows, dir / "metrics.csv");
  for (const auto& r : rows)
    std::cout << short_name(r.kind) << " noise " << r.noise << ": return MSE " << r.result.summary.return_mse
              << " +/- " << r.result.summary.return_sem << '\n';
  json seeds = json::array();
  for (int i = 0; i < o.repeats; ++i) {
    const RepeatSeeds s = repeat_seeds(o.seed, i);
    seeds.push_back({{"run", s.run}, {"split", s.split}, {"init", s.init}, {"noise", s.noise}});
  }
  write_manifest(dir, sub, argv,
                 {{"seeds", seeds},
                  {"data", source},
                  {"train_config", train_config_json(base.train)},
                  {"seconds", seconds_since(t0)}});
  return 0;
}

int cmd_rl_train(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const TaskId task = parse_task(o.task);
  const RewardSource source = parse_reward_source(o.reward_source);
  std::shared_ptr<const MilModel> model;
  if (source == RewardSource::learned_model) {
    require(!o.checkpoint.empty(), "rl-train: learned_model needs --checkpoint");
    model = std::make_shared<const MilModel>(load_checkpoint(o.checkpoint));
  }
  NavConfig nav;
  nav.noise = !o.no_motion_noise;
  const WrappedEnv env(task, source, model, nav);

  DqnConfig cfg;
  cfg.hidden.assign(o.hidden.begin(), o.hidden.end());
  cfg.buffer_capacity = o.buffer;
  cfg.batch_size = o.batch;
  cfg.gamma = o.gamma;
  cfg.learning_rate = o.rl_lr;
  cfg.polyak = o.polyak;
  cfg.double_q = !o.single_q;
  cfg.epsilon_decay_episodes = o.eps_decay;
  cfg.episodes = o.episodes;

  const auto t0 = Clock::now();
  std::vector<DqnResult> results(static_cast<std::size_t>(o.seeds));
  parallel_for(results.size(), o.jobs, [&](std::size_t i) {
    const std::uint64_t seed = o.seed + i;
    EpisodeCallback cb;
    if (o.verbose)
      cb = [seed](int e, Real ret, Real eps) {
        if ((e + 1) % 25 == 0) std::cerr << "seed " << seed << " episode " << e + 1 << " return " << ret << " eps " << eps << '\n';
      };
    results[i] = dqn_train(env, cfg, seed, cb);
  });

  const std::string kind = source == RewardSource::learned_model ? std::string(short_name(model->kind))
                                                                  : std::string(to_string(source));
  const fs::path dir = run_dir(o, "rl-train", o.task, kind);
  std::vector<TrainingCurve> curves;
  json per_seed = json::array();
  const int window = std::min(o.tail, o.episodes);
  for (const auto& r : results) {
    curves.push_back(r.curve);
    const ReturnStats ev = evaluate_policy(r.policy, env, o.eval_episodes, mix_seed(r.curve.seed, 99));
    const Real tail = tail_median(r.curve, window);
    std::cout << "rl-train " << o.task << '/' << kind << " seed " << r.curve.seed << ": median oracle return over last "
              << window << " episodes " << tail << ", greedy eval median " << ev.median << " (IQR " << ev.iqr() << ")\n";
    per_seed.push_back({{"seed", r.curve.seed}, {"tail_median", tail}, {"eval_median", ev.median},
                        {"eval_q1", ev.q1}, {"eval_q3", ev.q3}});
  }
  write_curves_csv(curves, dir / "curves.csv");
  write_manifest(dir, sub, argv,
                 {{"seeds", per_seed},
                  {"reward_source", to_string(source)},
                  {"checkpoint", o.checkpoint.empty() ? json(nullptr) : json(fs::absolute(o.checkpoint).string())},
                  {"seconds", seconds_since(t0)}});
  return 0;
}

int cmd_probe(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  require(!o.checkpoint.empty(), "probe: --checkpoint is required");
  const MilModel model = load_checkpoint(o.checkpoint);
  const OracleTask task(parse_task(o.task));
  std::vector<ProbeSpec> specs;
  if (!o.probe_text.empty()) specs.push_back(parse_probe(o.probe_text));
  for (const auto& p : o.presets) {
    if (p == "all") {
      const std::string prefix = o.task + "_";
      for (const auto& name : probe_preset_names())
        if (name.rfind(prefix, 0) == 0) specs.push_back(probe_preset(name));
    } else {
      specs.push_back(probe_preset(p));
    }
  }
  require(!specs.empty(), "probe: give --probe or --preset");
  const fs::path dir = run_dir(o, "probe", o.task, std::string(short_name(model.kind)));
  json probes = json::array();
  for (const auto& spec : specs) {
    const ProbeTrace tr = run_probe(model, task, spec, o.probe_noise, o.seed);
    const fs::path file = dir / ("probe_" + spec.name + ".csv");
    write_probe_csv(tr, file);
    std::cout << "probe " << spec.name << ": oracle return " << tr.oracle_return << ", model return "
              << tr.model_return << " -> " << file.string() << '\n';
    probes.push_back({{"spec", format_probe(spec)}, {"oracle_return", tr.oracle_return},
                      {"model_return", tr.model_return}});
  }
  write_manifest(dir, sub, argv,
                 {{"seeds", {{"motion_noise", o.probe_noise ? json(o.seed) : json(nullptr)}}},
                  {"checkpoint", fs::absolute(o.checkpoint).string()},
                  {"probes", probes}});
  return 0;
}

int cmd_export_hidden(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  require(!o.checkpoint.empty(), "export-hidden: --checkpoint is required");
  const MilModel model = load_checkpoint(o.checkpoint);
  json source;
  const auto bags = load_or_generate(o, source);
  const auto rows = export_embeddings(model, bags, parse_task(o.task));
  const fs::path dir = run_dir(o, "export-hidden", o.task, std::string(short_name(model.kind)));
  write_embeddings_csv(rows, dir / "embeddings.csv");
  std::cout << "export-hidden: " << rows.size() << " rows from " << bags.size() << " bags -> "
            << (dir / "embeddings.csv").string() << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", {{"data", o.data_seed}}},
                  {"checkpoint", fs::absolute(o.checkpoint).string()},
                  {"data", source},
                  {"rows", rows.size()}});
  return 0;
}

int cmd_reward_grid(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  require(!o.checkpoint.empty(), "reward-grid: --checkpoint is required");
  const MilModel model = load_checkpoint(o.checkpoint);
  const OracleTask task(parse_task(o.task));
  GridSpec spec;
  spec.resolution = o.resolution;
  spec.contexts = o.contexts.empty() ? default_contexts(task.id()) : o.contexts;
  const auto cells = reward_grid(model, task, spec);
  const fs::path dir = run_dir(o, "reward-grid", o.task, std::string(short_name(model.kind)));
  write_grid_csv(cells, dir / "grid.csv");
  Real sq = 0.0;
  for (const auto& c : cells) sq += (c.model_reward - c.oracle_reward) * (c.model_reward - c.oracle_reward);
  const Real mse = sq / static_cast<Real>(cells.size());
  std::cout << "reward-grid: " << cells.size() << " cells, model vs oracle MSE " << mse << " -> "
            << (dir / "grid.csv").string() << '\n';
  write_manifest(dir, sub, argv,
                 {{"seeds", json::object()},
                  {"checkpoint", fs::absolute(o.checkpoint).string()},
                  {"contexts", spec.contexts},
                  {"grid_mse", mse}});
  return 0;
}

int cmd_grad_check(const Options& o, const CLI::App& sub, const std::vector<std::string>& argv) {
  const auto kinds = parse_kinds({o.model});
  GradSuiteConfig cfg;
  cfg.draws = o.draws;
  cfg.max_bag_length = o.max_bag_length;
  cfg.param_scale = o.param_scale;
  cfg.eps = o.eps;
  cfg.tolerance = o.tolerance;
  cfg.seed = o.seed;
  const fs::path dir = run_dir(o, "grad-check", "none", kinds_label(kinds));
  std::ofstream csv(dir / "grad_check.csv");
  csv.precision(17);
  csv << "kind,draws,failures,worst_error,worst_draw,worst_parameter\n";
  bool ok = true;
  json results = json::array();
  for (ModelKind k : kinds) {
    const auto t0 = Clock::now();
    const GradSuiteResult r = gradient_suite(k, cfg);
    ok = ok && r.passed();
    std::cout << (r.passed() ? "PASS " : "FAIL ") << to_string(k) << ": worst relative error " << r.worst_error
              << " (" << r.worst_parameter << ", draw " << r.worst_draw << "), " << r.failures << '/' << r.draws
              << " draws over " << cfg.tolerance << ", " << seconds_since(t0) << " s\n";
    csv << to_string(k) << ',' << r.draws << ',' << r.failures << ',' << r.worst_error << ',' << r.worst_draw << ','
        << r.worst_parameter << '\n';
    results.push_back({{"kind", to_string(k)}, {"worst_error", r.worst_error}, {"failures", r.failures}});
  }
  write_manifest(dir, sub, argv, {{"seeds", {{"suite", o.seed}}}, {"results", results}, {"passed", ok}});
  return ok ? 0 : 1;
}

// ---- option wiring ----------------------------------------------------------

void add_common(CLI::App* s, Options& o) {
  s->add_option("--out-root", o.out_root, "Output root (default: $NMRM_OUT, else ./out)");
  s->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  s->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_task(CLI::App* s, Options& o, const std::string& help) {
  s->add_option("--task", o.task, help)->capture_default_str();
}

void add_data(CLI::App* s, Options& o) {
  s->add_option("--data", o.data, "JSONL dataset; generated from --task/--n/--data-seed when omitted");
  s->add_option("--n", o.n, "Bags to generate")->capture_default_str();
  s->add_option("--data-seed", o.data_seed, "Seed for generated datasets")->capture_default_str();
  s->add_flag("--no-motion-noise", o.no_motion_noise, "Disable navigation motion noise");
}

void add_training(CLI::App* s, Options& o) {
  s->add_option("--lr", o.lr, "Learning rate (default per task)");
  s->add_option("--weight-decay", o.weight_decay, "Adam weight decay (default per task)");
  s->add_option("--dropout", o.dropout, "Dropout rate (default per task)");
  s->add_option("--patience", o.patience, "Early-stopping patience in epochs (default per task)");
  s->add_option("--epochs", o.epochs, "Maximum epochs (default per task)");
  s->add_option("--label-scale", o.label_scale, "Targets are divided by this during optimisation")
      ->capture_default_str();
  s->add_flag("--verbose", o.verbose, "Progress on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Markovian reward modelling: data, MIL training, RL and inspection"};
  app.require_subcommand(1);
  // Options in the file live under a [<subcommand>] section.
  app.set_config("--config", "", "INI file of option values; command-line flags win");
  app.fallthrough();
  Options o;
  const std::vector<std::string> args(argv, argv + argc);

  auto* gen_data = app.add_subcommand("gen-data", "Generate a navigation dataset with class caps");
  add_common(gen_data, o);
  add_task(gen_data, o, "timer | moving | key | charger");
  gen_data->add_option("--n", o.n, "Bags")->capture_default_str();
  gen_data->add_flag("--no-motion-noise", o.no_motion_noise, "Disable navigation motion noise");

  auto* gen_toy = app.add_subcommand("gen-toy", "Generate a toy MIL dataset");
  add_common(gen_toy, o);
  add_task(gen_toy, o, "toggle | push | dial");
  gen_toy->add_option("--n", o.n, "Bags")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train one reward model");
  add_common(train_cmd, o);
  add_task(train_cmd, o, "Navigation or toy task");
  train_cmd->add_option("--model", o.model, "nn | embedding | instance | csc")->capture_default_str();
  add_data(train_cmd, o);
  add_training(train_cmd, o);
  train_cmd->add_option("--noise", o.noise, "Label-swap fraction on train and validation")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against oracle rewards");
  add_common(eval_cmd, o);
  add_task(eval_cmd, o, "Task of the evaluation data");
  eval_cmd->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  add_data(eval_cmd, o);
  eval_cmd->add_option("--subset", o.subset, "all | train | validation | test (split from --seed)")
      ->capture_default_str();

  auto* repeats_cmd = app.add_subcommand("repeats", "Repeated training with fresh splits and initialisations");
  add_common(repeats_cmd, o);
  add_task(repeats_cmd, o, "Navigation or toy task");
  repeats_cmd->add_option("--model", o.model, "nn | embedding | instance | csc")->capture_default_str();
  repeats_cmd->add_option("--repeats", o.repeats, "Repeats")->capture_default_str()->check(CLI::PositiveNumber);
  add_data(repeats_cmd, o);
  add_training(repeats_cmd, o);
  repeats_cmd->add_option("--noise", o.noise, "Label-swap fraction on train and validation")->capture_default_str();

  auto* robust = app.add_subcommand("robustness", "Label-noise sweep over models and noise levels");
  add_common(robust, o);
  add_task(robust, o, "Navigation or toy task");
  robust->add_option("--models", o.models, "Comma list of kinds, or all")->delimiter(',')->capture_default_str();
  robust->add_option("--noise", o.noise_levels, "Comma list of noise levels in [0, 0.5]")
      ->delimiter(',')
      ->capture_default_str();
  robust->add_option("--repeats", o.repeats, "Repeats per cell")->capture_default_str()->check(CLI::PositiveNumber);
  add_data(robust, o);
  add_training(robust, o);

  auto* rl = app.add_subcommand("rl-train", "DQN on a navigation task with an oracle or learned reward");
  add_common(rl, o);
  add_task(rl, o, "timer | moving | key | charger");
  rl->add_option("--reward-source", o.reward_source, "oracle_with_hidden | oracle_without_hidden | learned_model")
      ->capture_default_str();
  rl->add_option("--checkpoint", o.checkpoint, "Reward model for learned_model");
  rl->add_option("--seeds", o.seeds, "Consecutive seeds starting at --seed")->capture_default_str();
  rl->add_option("--episodes", o.episodes, "Training episodes")->capture_default_str();
  rl->add_option("--hidden", o.hidden, "Comma list of Q-network widths")->delimiter(',')->capture_default_str();
  rl->add_option("--buffer", o.buffer, "Replay capacity")->capture_default_str();
  rl->add_option("--batch-size", o.batch, "Minibatch size")->capture_default_str();
  rl->add_option("--gamma", o.gamma, "Discount")->capture_default_str();
  rl->add_option("--lr", o.rl_lr, "Adam learning rate")->capture_default_str();
  rl->add_option("--polyak", o.polyak, "Target-network averaging rate")->capture_default_str();
  rl->add_flag("--single-q", o.single_q, "Plain (not double) Q-learning targets");
  rl->add_option("--eps-decay-episodes", o.eps_decay, "Episodes of linear epsilon decay")->capture_default_str();
  rl->add_option("--eval-episodes", o.eval_episodes, "Greedy evaluation episodes")->capture_default_str();
  rl->add_option("--tail", o.tail, "Window for the final median return")->capture_default_str();
  rl->add_flag("--no-motion-noise", o.no_motion_noise, "Disable navigation motion noise");
  rl->add_flag("--verbose", o.verbose, "Progress on stderr");

  auto* probe = app.add_subcommand("probe", "Run probe trajectories through a model and the oracle");
  add_common(probe, o);
  add_task(probe, o, "timer | moving | key | charger");
  probe->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  probe->add_option("--preset", o.presets, "Comma list of presets, or all for the task")->delimiter(',');
  probe->add_option("--probe", o.probe_text, "Probe spec 'name; x,y xN; ...'");
  probe->add_flag("--motion-noise", o.probe_noise, "Enable motion noise (drawn from --seed)");

  auto* hidden = app.add_subcommand("export-hidden", "Export 2-d LSTM hidden states with categories");
  add_common(hidden, o);
  add_task(hidden, o, "timer | moving | key | charger");
  hidden->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  add_data(hidden, o);

  auto* grid = app.add_subcommand("reward-grid", "Model and oracle rewards over a position grid");
  add_common(grid, o);
  add_task(grid, o, "timer | moving | key | charger");
  grid->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  grid->add_option("--resolution", o.resolution, "Points per axis")->capture_default_str();
  grid->add_option("--contexts", o.contexts, "Comma list of hidden contexts (default per task)")->delimiter(',');

  auto* gc = app.add_subcommand("grad-check", "Finite-difference gradient suite");
  add_common(gc, o);
  gc->add_option("--model", o.model, "Kind or all")->capture_default_str();
  gc->add_option("--draws", o.draws, "Random draws per kind")->capture_default_str();
  gc->add_option("--max-bag-length", o.max_bag_length, "Longest random bag")->capture_default_str();
  gc->add_option("--eps", o.eps, "Central-difference step")->capture_default_str();
  gc->add_option("--param-scale", o.param_scale, "Parameter range times 1/sqrt(fan-in)")->capture_default_str();
  gc->add_option("--tolerance", o.tolerance, "Maximum relative error")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  // Subcommand options share one Options struct; only the chosen one is parsed.
  const CLI::App* sub = app.get_subcommands().front();
  try {
    const std::string name = sub->get_name();
    if (name == "gen-data") return cmd_gen_data(o, *sub, args);
    if (name == "gen-toy") return cmd_gen_toy(o, *sub, args);
    if (name == "train") return cmd_train(o, *sub, args);
    if (name == "eval") return cmd_eval(o, *sub, args);
    if (name == "repeats") return cmd_repeats(o, *sub, args);
    if (name == "robustness") return cmd_robustness(o, *sub, args);
    if (name == "rl-train") return cmd_rl_train(o, *sub, args);
    if (name == "probe") return cmd_probe(o, *sub, args);
    if (name == "export-hidden") return cmd_export_hidden(o, *sub, args);
    if (name == "reward-grid") return cmd_reward_grid(o, *sub, args);
    if (name == "grad-check") return cmd_grad_check(o, *sub, args);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
