#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmrm/bag.hpp"
#include "nmrm/envs/oracle.hpp"

namespace nmrm {

// Trajectory classes used to cap per-class counts during generation.
//   timer  : (num_neg in 0..50, num_pos in 0..50), encoded num_neg * 51 + num_pos
//   moving : num_treasure in 0..100
//   key    : 0 no_key, 1 key_no_treasure, 2 treasure
//   charger: (num_treasure in 0..100, charge_bin in 1..20), encoded num_treasure * 20 + bin - 1
class TrajectoryClassifier {
 public:
  explicit TrajectoryClassifier(TaskId task) : task_(task) {}

  void observe(const NavState& s, Real reward, const HiddenState& hidden_after);
  int class_id() const;

 private:
  TaskId task_;
  int negatives_ = 0;
  int positives_ = 0;
  int in_treasure_ = 0;
  Real charge_sum_ = 0.0;
  bool had_key_ = false;
};

int classify_trajectory(const OracleTask& task, const TrajectoryBag& bag);

int num_classes(TaskId task);
std::string describe_class(TaskId task, int class_id);

// Charger charge bin for a mean in-treasure charge: min(20, 1 + floor(20 * mean)).
int charge_bin(Real mean_charge);

struct ClassLimits {
  std::function<Real(int class_id)> proportion;
  std::string description;
};

// Per-class limits: timer 0.002, moving 0.05, key {0.25, 0.25, 0.5}, charger 0.002.
ClassLimits default_class_limits(TaskId task);

// A class admits bags while its count is below ceil(p_k * N).
int class_cap(const ClassLimits& limits, int class_id, std::size_t n);

struct GenerateOptions {
  std::uint64_t max_attempts = 200'000'000;
  int jobs = 1;
  NavConfig nav;
};

class GenerationStalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedDataset {
  std::vector<TrajectoryBag> bags;
  std::uint64_t attempts = 0;
  std::map<int, int> histogram;
};

// Rejection sampling of uniform-random-action rollouts until N bags are kept.
// Candidate i is simulated from seed mix_seed(seed, i), so the result does not
// depend on `jobs`.
GeneratedDataset generate_dataset(const OracleTask& task, std::size_t n, const ClassLimits& limits,
                                  std::uint64_t seed, const GenerateOptions& options = {});

std::map<int, int> class_histogram(const std::vector<TrajectoryBag>& bags);

}  // namespace nmrm
