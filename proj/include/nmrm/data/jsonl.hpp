#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmrm/bag.hpp"

namespace nmrm {

// One bag per line:
// {"task": str, "class": int, "return": float, "states": [[f,...]],
//  "actions": [int], "rewards": [f], "hiddens": [[f,...]]}
// plus "noisy": true on relabelled bags. Numbers are written in shortest
// round-trip form, so load(save(x)) == x.
std::string bag_to_json_line(const TrajectoryBag& bag);
TrajectoryBag bag_from_json_line(const std::string& line, std::size_t line_number = 0);

void write_dataset(std::ostream& out, const std::vector<TrajectoryBag>& bags);
std::vector<TrajectoryBag> read_dataset(std::istream& in);

void save_dataset(const std::vector<TrajectoryBag>& bags, const std::filesystem::path& path);
std::vector<TrajectoryBag> load_dataset(const std::filesystem::path& path);

}  // namespace nmrm
