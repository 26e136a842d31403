#include "nmrm/mil/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nmrm/numeric/params.hpp"

namespace nmrm {

using Json = nlohmann::ordered_json;

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void read_vec(const Json& j, Vec& out, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != out.size())
    throw FormatError("checkpoint: parameter " + name + " should have " + std::to_string(out.size()) +
                      " entries");
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = j[static_cast<std::size_t>(i)].get<Real>();
}

void read_mat(const Json& j, Mat& out, const std::string& name) {
  const std::string shape = std::to_string(out.rows()) + "x" + std::to_string(out.cols());
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != out.rows())
    throw FormatError("checkpoint: parameter " + name + " should be " + shape);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != out.cols())
      throw FormatError("checkpoint: parameter " + name + " should be " + shape);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<Real>();
  }
}

std::vector<Eigen::Index> widths(const Json& j) {
  return j.get<std::vector<Eigen::Index>>();
}

}  // namespace

std::string checkpoint_to_string(const MilModel& model) {
  Json shape;
  shape["fe_widths"] = model.shape.fe_widths;
  shape["hn_widths"] = model.shape.hn_widths;
  shape["hidden_size"] = model.shape.hidden_size;
  shape["dropout"] = model.shape.dropout;
  shape["leaky_head"] = model.shape.leaky_head;
  shape["head_leaky_slope"] = model.shape.head_leaky_slope;

  Json manifest;
  manifest["kind"] = std::string(to_string(model.kind));
  manifest["feature_dim"] = model.feature_dim;
  manifest["seed"] = model.seed;
  manifest["shape"] = shape;
  manifest["normaliser"] = {{"mean", vec_json(model.normaliser.mean)},
                            {"std", vec_json(model.normaliser.stddev)}};

  Json params = Json::object();
  for_each_param(model, [&](const std::string& name, const auto& t) {
    using T = std::decay_t<decltype(t)>;
    if constexpr (std::is_same_v<T, Vec>)
      params[name] = vec_json(t);
    else
      params[name] = mat_json(t);
  });

  Json doc;
  doc["format"] = "nmrm-checkpoint";
  doc["version"] = 1;
  doc["manifest"] = manifest;
  doc["parameters"] = params;
  return doc.dump();
}

MilModel checkpoint_from_string(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("checkpoint: invalid JSON (") + e.what() + ")");
  }
  try {
    if (doc.at("format").get<std::string>() != "nmrm-checkpoint")
      throw FormatError("checkpoint: not an nmrm checkpoint");
    if (doc.at("version").get<int>() != 1) throw FormatError("checkpoint: unsupported version");
    const Json& man = doc.at("manifest");
    const Json& sj = man.at("shape");
    ModelShape shape;
    shape.fe_widths = widths(sj.at("fe_widths"));
    shape.hn_widths = widths(sj.at("hn_widths"));
    shape.hidden_size = sj.at("hidden_size").get<Eigen::Index>();
    shape.dropout = sj.at("dropout").get<Real>();
    shape.leaky_head = sj.at("leaky_head").get<bool>();
    shape.head_leaky_slope = sj.at("head_leaky_slope").get<Real>();

    MilModel m = build_model(parse_model_kind(man.at("kind").get<std::string>()),
                             man.at("feature_dim").get<Eigen::Index>(), man.at("seed").get<std::uint64_t>(),
                             shape);
    m.normaliser.mean.resize(m.feature_dim);
    m.normaliser.stddev.resize(m.feature_dim);
    read_vec(man.at("normaliser").at("mean"), m.normaliser.mean, "normaliser.mean");
    read_vec(man.at("normaliser").at("std"), m.normaliser.stddev, "normaliser.std");

    const Json& params = doc.at("parameters");
    std::size_t seen = 0;
    for_each_param(m, [&](const std::string& name, auto& t) {
      if (!params.contains(name)) throw FormatError("checkpoint: missing parameter " + name);
      using T = std::decay_t<decltype(t)>;
      if constexpr (std::is_same_v<T, Vec>)
        read_vec(params[name], t, name);
      else
        read_mat(params[name], t, name);
      ++seen;
    });
    if (seen != params.size()) throw FormatError("checkpoint: unexpected extra parameters");
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint: bad or missing field (") + e.what() + ")");
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint: inconsistent manifest (") + e.what() + ")");
  }
}

void save_checkpoint(const MilModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << checkpoint_to_string(model) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

MilModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace nmrm
