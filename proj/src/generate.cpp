#include "nmrm/data/generate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace nmrm {

void TrajectoryClassifier::observe(const NavState& s, Real reward, const HiddenState& hidden_after) {
  switch (task_) {
    case TaskId::timer:
      if (reward < 0.0) ++negatives_;
      if (reward > 0.0) ++positives_;
      break;
    case TaskId::moving:
      if (reward > 0.0) ++in_treasure_;
      break;
    case TaskId::key:
      if (hidden_after[0] == 1.0) had_key_ = true;
      if (reward > 0.0) ++in_treasure_;
      break;
    case TaskId::charger:
      if (zones::kTreasure.contains(s)) {
        ++in_treasure_;
        charge_sum_ += hidden_after[0];
      }
      break;
  }
}

int charge_bin(Real mean_charge) {
  const int bin = 1 + static_cast<int>(std::floor(mean_charge * 20.0));
  return std::clamp(bin, 1, 20);
}

int TrajectoryClassifier::class_id() const {
  switch (task_) {
    case TaskId::timer:
      return negatives_ * 51 + positives_;
    case TaskId::moving:
      return in_treasure_;
    case TaskId::key:
      if (!had_key_) return 0;
      return in_treasure_ > 0 ? 2 : 1;
    case TaskId::charger: {
      const int bin = in_treasure_ == 0 ? 1 : charge_bin(charge_sum_ / in_treasure_);
      return in_treasure_ * 20 + (bin - 1);
    }
  }
  return 0;
}

int classify_trajectory(const OracleTask& task, const TrajectoryBag& bag) {
  require(bag.task == task.name(), "classify_trajectory: bag task '" + bag.task +
                                       "' does not match classifier task '" +
                                       std::string(task.name()) + "'");
  require(bag.rewards.size() == bag.size() && bag.hiddens.size() == bag.size(),
          "classify_trajectory: ragged bag");
  TrajectoryClassifier cls(task.id());
  for (std::size_t t = 0; t < bag.size(); ++t) {
    const auto& s = bag.states[t];
    require(s.size() == 2, "classify_trajectory: navigation states are 2D");
    cls.observe({s[0], s[1]}, bag.rewards[t], HiddenState::from_vector(bag.hiddens[t]));
  }
  return cls.class_id();
}

int num_classes(TaskId task) {
  switch (task) {
    case TaskId::timer: return 51 * 51;
    case TaskId::moving: return 101;
    case TaskId::key: return 3;
    case TaskId::charger: return 101 * 20;
  }
  return 0;
}

std::string describe_class(TaskId task, int class_id) {
  std::ostringstream out;
  switch (task) {
    case TaskId::timer:
      out << "num_neg=" << class_id / 51 << " num_pos=" << class_id % 51;
      break;
    case TaskId::moving:
      out << "num_treasure=" << class_id;
      break;
    case TaskId::key: {
      static const char* names[] = {"no_key", "key_no_treasure", "treasure"};
      out << (class_id >= 0 && class_id < 3 ? names[class_id] : "invalid");
      break;
    }
    case TaskId::charger:
      out << "num_treasure=" << class_id / 20 << " charge_bin=" << class_id % 20 + 1;
      break;
  }
  return out.str();
}

ClassLimits default_class_limits(TaskId task) {
  switch (task) {
    case TaskId::timer: return {[](int) { return 0.002; }, "p=0.002 per (num_neg, num_pos)"};
    case TaskId::moving: return {[](int) { return 0.05; }, "p=0.05 per num_treasure"};
    case TaskId::key:
      return {[](int c) { return c == 2 ? 0.5 : 0.25; },
              "no_key 0.25, key_no_treasure 0.25, treasure 0.5"};
    case TaskId::charger:
      return {[](int) { return 0.002; }, "p=0.002 per (num_treasure, charge_bin)"};
  }
  return {};
}

int class_cap(const ClassLimits& limits, int class_id, std::size_t n) {
  const Real quota = limits.proportion(class_id) * static_cast<Real>(n);
  // Tolerance absorbs representation error in products like 0.002 * 5000.
  return static_cast<int>(std::ceil(quota - 1e-9));
}

namespace {

int simulate_class(const OracleTask& task, std::uint64_t seed, const NavConfig& cfg,
                   const ActionSource& actions) {
  Rng rng(seed);
  const NavState start = sample_spawn(task, rng);
  TrajectoryClassifier cls(task.id());
  simulate_episode(task, start, task.episode_length(), actions, rng, cfg,
                   [&](const StepRecord& rec) { cls.observe(rec.state, rec.reward, rec.hidden_after); });
  return cls.class_id();
}

}  // namespace

GeneratedDataset generate_dataset(const OracleTask& task, std::size_t n, const ClassLimits& limits,
                                  std::uint64_t seed, const GenerateOptions& options) {
  require(static_cast<bool>(limits.proportion), "generate_dataset: class limits missing");
  const int classes = num_classes(task.id());
  std::vector<int> caps(static_cast<std::size_t>(classes));
  std::size_t total_cap = 0;
  for (int c = 0; c < classes; ++c) {
    caps[static_cast<std::size_t>(c)] = class_cap(limits, c, n);
    total_cap += static_cast<std::size_t>(std::max(caps[static_cast<std::size_t>(c)], 0));
  }
  require(total_cap >= n, "generate_dataset: class caps admit only " + std::to_string(total_cap) +
                              " bags, fewer than N=" + std::to_string(n));

  const ActionSource actions = uniform_random_actions();
  const int jobs = std::max(1, options.jobs);
  const std::size_t chunk = jobs == 1 ? 1 : 512 * static_cast<std::size_t>(jobs);

  GeneratedDataset out;
  std::vector<int> counts(static_cast<std::size_t>(classes), 0);
  std::vector<std::uint64_t> rejected(static_cast<std::size_t>(classes), 0);
  std::vector<int> chunk_classes(chunk);
  std::uint64_t next = 0;

  while (out.bags.size() < n) {
    if (next >= options.max_attempts) {
      std::ostringstream msg;
      msg << "generate_dataset(" << task.name() << "): stalled after " << next << " attempts with "
          << out.bags.size() << "/" << n << " bags; saturated classes:";
      int listed = 0;
      for (int c = 0; c < classes; ++c) {
        const auto i = static_cast<std::size_t>(c);
        if (rejected[i] > 0 && listed++ < 50)
          msg << " [" << describe_class(task.id(), c) << " " << counts[i] << "/" << caps[i] << ", "
              << rejected[i] << " rejected]";
      }
      if (listed > 50) msg << " ... (" << listed << " total)";
      throw GenerationStalled(msg.str());
    }
    const std::size_t batch =
        static_cast<std::size_t>(std::min<std::uint64_t>(chunk, options.max_attempts - next));
    if (jobs == 1) {
      chunk_classes[0] = simulate_class(task, mix_seed(seed, next), options.nav, actions);
    } else {
      std::vector<std::thread> workers;
      for (int j = 0; j < jobs; ++j) {
        workers.emplace_back([&, j] {
          for (std::size_t k = static_cast<std::size_t>(j); k < batch; k += static_cast<std::size_t>(jobs))
            chunk_classes[k] = simulate_class(task, mix_seed(seed, next + k), options.nav, actions);
        });
      }
      for (auto& w : workers) w.join();
    }
    // Admission is serial and in candidate order.
    for (std::size_t k = 0; k < batch && out.bags.size() < n; ++k) {
      const int c = chunk_classes[k];
      auto& count = counts[static_cast<std::size_t>(c)];
      if (count < caps[static_cast<std::size_t>(c)]) {
        ++count;
        TrajectoryBag bag = rollout(task, actions, mix_seed(seed, next + k), options.nav);
        bag.class_id = c;
        out.bags.push_back(std::move(bag));
        out.histogram[c] += 1;
      } else {
        ++rejected[static_cast<std::size_t>(c)];
      }
      out.attempts = next + k + 1;
    }
    next += batch;
  }
  return out;
}

std::map<int, int> class_histogram(const std::vector<TrajectoryBag>& bags) {
  std::map<int, int> hist;
  for (const auto& b : bags) hist[b.class_id] += 1;
  return hist;
}

}  // namespace nmrm
