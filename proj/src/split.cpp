#include "nmrm/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nmrm {

DatasetSplit split_dataset(std::size_t n, std::uint64_t seed) {
  require(n >= 10, "split_dataset: need at least 10 bags, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t held_out = n / 10;
  const std::size_t train_size = n - 2 * held_out;
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size),
                          order.begin() + static_cast<std::ptrdiff_t>(train_size + held_out));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size + held_out), order.end());
  return split;
}

std::vector<std::size_t> apply_label_noise(std::vector<TrajectoryBag>& bags,
                                           const std::vector<std::size_t>& subset, Real nu,
                                           std::uint64_t seed) {
  require(nu >= 0.0 && nu <= 0.5, "apply_label_noise: nu must lie in [0, 0.5]");
  const auto k = static_cast<std::size_t>(std::floor(nu * static_cast<Real>(subset.size()) + 1e-9));
  if (nu == 0.0) return {};
  require(k >= 2, "apply_label_noise: nu * |bags| must be at least 2 to swap labels");
  for (std::size_t i : subset) require(i < bags.size(), "apply_label_noise: index out of range");

  Rng rng(seed);
  std::vector<std::size_t> chosen = subset;
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(k);
  std::uniform_int_distribution<std::size_t> shift_dist(1, k - 1);
  const std::size_t shift = shift_dist(rng);

  std::vector<Real> labels(k);
  for (std::size_t j = 0; j < k; ++j) labels[j] = bags[chosen[j]].bag_return;
  for (std::size_t j = 0; j < k; ++j) {
    auto& bag = bags[chosen[j]];
    bag.bag_return = labels[(j + shift) % k];
    bag.noisy = true;
  }
  return chosen;
}

}  // namespace nmrm
