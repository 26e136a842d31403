#pragma once

#include <cstdint>
#include <vector>

#include "nmrm/bag.hpp"

namespace nmrm {

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Seeded uniform shuffle, then 80/10/10: validation and test get floor(n/10)
// each, train takes the remainder. Requires n >= 10.
DatasetSplit split_dataset(std::size_t n, std::uint64_t seed);

inline DatasetSplit split_dataset(const std::vector<TrajectoryBag>& bags, std::uint64_t seed) {
  return split_dataset(bags.size(), seed);
}

template <class T>
std::vector<T> select(const std::vector<T>& items, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items.at(i));
  return out;
}

// Swaps return labels among floor(nu * |subset|) randomly chosen bags of the
// subset with a uniformly random non-zero cyclic shift, so each chosen bag
// receives another chosen bag's label. Marks those bags noisy and returns
// their indices. Requires nu in [0, 0.5] and either nu = 0 or at least two
// bags selected.
std::vector<std::size_t> apply_label_noise(std::vector<TrajectoryBag>& bags,
                                           const std::vector<std::size_t>& subset, Real nu,
                                           std::uint64_t seed);

}  // namespace nmrm
