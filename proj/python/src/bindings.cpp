#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "nmrm/data/generate.hpp"
#include "nmrm/data/jsonl.hpp"
#include "nmrm/data/split.hpp"
#include "nmrm/data/toy.hpp"
#include "nmrm/envs/lunar.hpp"
#include "nmrm/interp/interp.hpp"
#include "nmrm/mil/checkpoint.hpp"
#include "nmrm/mil/grad_suite.hpp"
#include "nmrm/rl/dqn.hpp"
#include "nmrm/train/train.hpp"

namespace py = pybind11;
using namespace nmrm;

namespace {

// Bags cross the boundary as T x d matrices so numpy sees one array per field.
Mat rows_to_matrix(const std::vector<std::vector<Real>>& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::vector<std::vector<Real>> matrix_to_rows(const Mat& m) {
  std::vector<std::vector<Real>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
  return rows;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["return_mse"] = m.return_mse;
  d["reward_mse"] = m.reward_mse;
  d["return_sem"] = m.return_sem;
  d["reward_sem"] = m.reward_sem;
  d["count"] = m.count;
  return d;
}

struct TrainOutput {
  MilModel model;
  std::vector<EpochRecord> history;
  Metrics test;
  int best_epoch;
};

}  // namespace

PYBIND11_MODULE(_nmrm, m) {
  m.doc() = "Reward models for non-Markovian tasks: data generation, MIL training, DQN and inspection";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.attr("model_kinds") = py::make_tuple("instance_space_nn", "embedding_space_lstm", "instance_space_lstm",
                                         "csc_instance_space_lstm");
  m.attr("tasks") = py::make_tuple("timer", "moving", "key", "charger");

  py::class_<TrajectoryBag>(m, "Bag")
      .def(py::init<>())
      .def_readwrite("task", &TrajectoryBag::task)
      .def_readwrite("class_id", &TrajectoryBag::class_id)
      .def_readwrite("bag_return", &TrajectoryBag::bag_return)
      .def_readwrite("actions", &TrajectoryBag::actions)
      .def_readwrite("rewards", &TrajectoryBag::rewards)
      .def_readwrite("noisy", &TrajectoryBag::noisy)
      .def_property(
          "states", [](const TrajectoryBag& b) { return rows_to_matrix(b.states); },
          [](TrajectoryBag& b, const Mat& s) { b.states = matrix_to_rows(s); })
      .def_property(
          "hiddens", [](const TrajectoryBag& b) { return rows_to_matrix(b.hiddens); },
          [](TrajectoryBag& b, const Mat& h) { b.hiddens = matrix_to_rows(h); })
      .def("__len__", &TrajectoryBag::size)
      .def("__eq__", [](const TrajectoryBag& a, const TrajectoryBag& b) { return a == b; })
      .def("__repr__", [](const TrajectoryBag& b) {
        return "<Bag " + b.task + " T=" + std::to_string(b.size()) + " return=" + std::to_string(b.bag_return) + ">";
      });

  m.def(
      "generate_dataset",
      [](const std::string& task, std::size_t n, std::uint64_t seed, int jobs, bool motion_noise) {
        const OracleTask ot(parse_task(task));
        GenerateOptions gen;
        gen.jobs = jobs;
        gen.nav.noise = motion_noise;
        py::gil_scoped_release release;
        return generate_dataset(ot, n, default_class_limits(ot.id()), seed, gen).bags;
      },
      py::arg("task"), py::arg("n"), py::arg("seed"), py::arg("jobs") = 1, py::arg("motion_noise") = true,
      "Rejection-sampled navigation dataset with the task's class caps.");
  m.def(
      "toy_dataset", [](const std::string& kind, std::size_t n, std::uint64_t seed) {
        return gen_toy_dataset(parse_toy(kind), n, seed);
      },
      py::arg("kind"), py::arg("n"), py::arg("seed"));
  m.def("class_histogram", &class_histogram, py::arg("bags"));
  m.def("save_dataset", &save_dataset, py::arg("bags"), py::arg("path"));
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def(
      "split_dataset",
      [](std::size_t n, std::uint64_t seed) {
        const DatasetSplit s = split_dataset(n, seed);
        return py::make_tuple(s.train, s.validation, s.test);
      },
      py::arg("n"), py::arg("seed"), "(train, validation, test) index lists, 80/10/10.");
  m.def(
      "apply_label_noise",
      [](std::vector<TrajectoryBag> bags, const std::vector<std::size_t>& subset, Real nu, std::uint64_t seed) {
        const auto changed = apply_label_noise(bags, subset, nu, seed);
        return py::make_tuple(bags, changed);
      },
      py::arg("bags"), py::arg("subset"), py::arg("nu"), py::arg("seed"),
      "Returns (relabelled copy, indices of swapped bags).");

  m.def(
      "oracle_step",
      [](const std::string& task, const std::vector<Real>& hidden, Real x, Real y, int action) {
        const OracleTask ot(parse_task(task));
        const HiddenState h = hidden.empty() ? ot.initial_hidden() : HiddenState::from_vector(hidden);
        const auto [next, r] = ot.update_and_reward(h, {x, y}, action_from_index(action));
        return py::make_tuple(next.to_vector(), r);
      },
      py::arg("task"), py::arg("hidden"), py::arg("x"), py::arg("y"), py::arg("action"),
      "One oracle update: (h', r). An empty hidden list means the initial state.");
  m.def(
      "lunar_oracle",
      [](const std::vector<Real>& s, int hidden) {
        require(s.size() == 8, "lunar_oracle: state has 8 entries");
        const lunar::LunarState st{s[0], s[1], s[2], s[3], s[4], s[5], static_cast<int>(s[6]), static_cast<int>(s[7])};
        const auto out = lunar::oracle_step(st, hidden);
        return py::make_tuple(out.hidden_next, out.reward);
      },
      py::arg("state"), py::arg("hidden"));

  py::class_<MilModel, std::shared_ptr<MilModel>>(m, "Model")
      .def_property_readonly("kind", [](const MilModel& mm) { return std::string(to_string(mm.kind)); })
      .def_property_readonly("feature_dim", [](const MilModel& mm) { return mm.feature_dim; })
      .def_property_readonly("hidden_size", &MilModel::hidden_size)
      .def(
          "predict",
          [](const MilModel& mm, const Mat& states) {
            const PredictionTrace p = predict(mm, Mat(states.transpose()));
            py::dict d;
            d["rewards"] = p.rewards;
            d["bag_return"] = p.bag_return;
            d["hiddens"] = Mat(p.hiddens.transpose());
            return d;
          },
          py::arg("states"), "Per-step rewards, hidden states (T x H) and the return for a T x d state array.")
      .def("save", [](const MilModel& mm, const std::filesystem::path& p) { save_checkpoint(mm, p); })
      .def("to_json", [](const MilModel& mm) { return checkpoint_to_string(mm); });

  m.def(
      "build_model",
      [](const std::string& kind, const std::string& task, std::uint64_t seed) {
        return std::make_shared<MilModel>(build_model(parse_model_kind(kind), 2, seed, default_shape(task)));
      },
      py::arg("kind"), py::arg("task"), py::arg("seed"), "Untrained model with the task's default shape.");
  m.def(
      "load_checkpoint", [](const std::filesystem::path& p) { return std::make_shared<MilModel>(load_checkpoint(p)); },
      py::arg("path"));
  m.def(
      "checkpoint_from_json", [](const std::string& s) { return std::make_shared<MilModel>(checkpoint_from_string(s)); },
      py::arg("text"));

  m.def(
      "train",
      [](const std::vector<TrajectoryBag>& bags, const std::string& task, const std::string& kind, std::uint64_t seed,
         std::optional<int> max_epochs, std::optional<int> patience, std::optional<Real> learning_rate, Real noise) {
        ExperimentConfig ec;
        ec.kind = parse_model_kind(kind);
        ec.shape = default_shape(task);
        ec.train = default_train_config(task);
        if (max_epochs) ec.train.max_epochs = *max_epochs;
        ec.train.patience = patience ? *patience : std::min(ec.train.patience, ec.train.max_epochs);
        if (learning_rate) ec.train.learning_rate = *learning_rate;
        ec.noise = noise;
        TrainOutput out;
        {
          py::gil_scoped_release release;
          RepeatSummary rs = run_repeats(bags, ec, 1, seed);
          RepeatRun& r = rs.runs.front();
          out = {std::move(r.result.model), std::move(r.result.history), r.metrics, r.best_epoch};
        }
        py::list history;
        for (const auto& e : out.history) history.append(py::make_tuple(e.epoch, e.train_mse, e.val_mse, e.is_best));
        py::dict d;
        d["model"] = std::make_shared<MilModel>(std::move(out.model));
        d["history"] = history;
        d["test"] = metrics_dict(out.test);
        d["best_epoch"] = out.best_epoch;
        return d;
      },
      py::arg("bags"), py::arg("task"), py::arg("kind"), py::arg("seed"), py::arg("max_epochs") = py::none(),
      py::arg("patience") = py::none(), py::arg("learning_rate") = py::none(), py::arg("noise") = 0.0,
      "Train with the task's defaults on the seed's 80/10/10 split; returns model, history "
      "(epoch, train_mse, val_mse, is_best) and test metrics.");
  m.def(
      "evaluate", [](const MilModel& mm, const std::vector<TrajectoryBag>& bags) { return metrics_dict(evaluate(mm, bags)); },
      py::arg("model"), py::arg("bags"));

  m.def(
      "gradient_check",
      [](const std::string& kind, int draws, std::uint64_t seed) {
        GradSuiteConfig cfg;
        cfg.draws = draws;
        cfg.seed = seed;
        GradSuiteResult r;
        {
          py::gil_scoped_release release;
          r = gradient_suite(parse_model_kind(kind), cfg);
        }
        py::dict d;
        d["worst_error"] = r.worst_error;
        d["failures"] = r.failures;
        d["worst_parameter"] = r.worst_parameter;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("kind"), py::arg("draws") = 20, py::arg("seed") = 1);

  m.def(
      "rl_train",
      [](const std::string& task, const std::string& source, std::shared_ptr<MilModel> model, int episodes,
         std::uint64_t seed, const std::vector<long>& hidden, std::size_t batch_size, std::size_t buffer) {
        DqnConfig cfg;
        cfg.episodes = episodes;
        cfg.hidden.assign(hidden.begin(), hidden.end());
        cfg.batch_size = batch_size;
        cfg.buffer_capacity = buffer;
        const WrappedEnv env(parse_task(task), parse_reward_source(source), model);
        py::gil_scoped_release release;
        return dqn_train(env, cfg, seed).curve.oracle_returns;
      },
      py::arg("task"), py::arg("source") = "oracle_with_hidden", py::arg("model") = nullptr,
      py::arg("episodes") = 400, py::arg("seed") = 1, py::arg("hidden") = std::vector<long>{256, 128, 64},
      py::arg("batch_size") = 128, py::arg("buffer") = 50000, "DQN training; returns per-episode oracle returns.");

  m.def("probe_presets", &probe_preset_names);
  m.def(
      "run_probe",
      [](const MilModel& mm, const std::string& task, const std::string& probe) {
        const ProbeSpec spec = probe.find(';') == std::string::npos ? probe_preset(probe) : parse_probe(probe);
        const ProbeTrace t = run_probe(mm, OracleTask(parse_task(task)), spec);
        py::dict d;
        d["oracle_rewards"] = t.oracle_rewards;
        d["model_rewards"] = t.model_rewards;
        d["oracle_return"] = t.oracle_return;
        d["model_return"] = t.model_return;
        d["model_hiddens"] = Mat(t.model_hidden.transpose());
        return d;
      },
      py::arg("model"), py::arg("task"), py::arg("probe"), "Probe by preset name or 'name; x,y xN; ...' text.");
}
