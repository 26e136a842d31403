#include "nmrm/data/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace nmrm {

using Json = nlohmann::ordered_json;

std::string bag_to_json_line(const TrajectoryBag& bag) {
  Json j;
  j["task"] = bag.task;
  j["class"] = bag.class_id;
  j["return"] = bag.bag_return;
  j["states"] = bag.states;
  j["actions"] = bag.actions;
  j["rewards"] = bag.rewards;
  j["hiddens"] = bag.hiddens;
  if (bag.noisy) j["noisy"] = true;
  return j.dump();
}

TrajectoryBag bag_from_json_line(const std::string& line, std::size_t line_number) {
  const std::string where = "dataset line " + std::to_string(line_number) + ": ";
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(where + "invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError(where + "expected a JSON object");
  TrajectoryBag bag;
  try {
    bag.task = j.at("task").get<std::string>();
    bag.class_id = j.at("class").get<int>();
    bag.bag_return = j.at("return").get<Real>();
    bag.states = j.at("states").get<std::vector<std::vector<Real>>>();
    bag.actions = j.at("actions").get<std::vector<int>>();
    bag.rewards = j.at("rewards").get<std::vector<Real>>();
    bag.hiddens = j.at("hiddens").get<std::vector<std::vector<Real>>>();
    bag.noisy = j.value("noisy", false);
  } catch (const Json::exception& e) {
    throw FormatError(where + "bad or missing field (" + e.what() + ")");
  }
  const std::size_t n = bag.states.size();
  if (bag.actions.size() != n || bag.rewards.size() != n || bag.hiddens.size() != n)
    throw FormatError(where + "per-step arrays have different lengths");
  return bag;
}

void write_dataset(std::ostream& out, const std::vector<TrajectoryBag>& bags) {
  for (const auto& bag : bags) out << bag_to_json_line(bag) << '\n';
}

std::vector<TrajectoryBag> read_dataset(std::istream& in) {
  std::vector<TrajectoryBag> bags;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    bags.push_back(bag_from_json_line(line, number));
  }
  return bags;
}

void save_dataset(const std::vector<TrajectoryBag>& bags, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_dataset(out, bags);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<TrajectoryBag> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return read_dataset(in);
}

}  // namespace nmrm
