#pragma once

// Checkpoint document:
//   {"arch": "single"|"multi", "format_version": 1, "params": {"<name>": {"data": [...],
//    "shape": [...]}}, "spec": {...}}
// Keys are emitted in lexicographic order. Values are written as the exact double value of
// each stored float, printed shortest-round-trip, so load(save(m)) is bit-identical.

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "har/errors.hpp"
#include "har/io.hpp"
#include "har/model.hpp"

namespace har {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json spec_to_json(const ModelSpec& s) {
  return {{"arch", to_string(s.arch)},       {"window_len", s.window_len},
          {"input_channels", s.input_channels}, {"filters", s.filters},
          {"kernel", s.kernel},              {"pool_size", s.pool.size},
          {"pool_stride", s.pool.stride},    {"lstm_hidden", s.lstm_hidden},
          {"dropout", s.dropout},            {"dense_units", s.dense_units},
          {"num_classes", s.num_classes},    {"activation", to_string(s.activation)}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.arch = parse_arch(j.at("arch").get<std::string>());
  s.window_len = j.at("window_len").get<std::size_t>();
  s.input_channels = j.at("input_channels").get<std::size_t>();
  s.filters = j.at("filters").get<std::vector<std::size_t>>();
  s.kernel = j.at("kernel").get<std::size_t>();
  s.pool.size = j.at("pool_size").get<std::size_t>();
  s.pool.stride = j.at("pool_stride").get<std::size_t>();
  s.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  s.dropout = j.at("dropout").get<double>();
  s.dense_units = j.at("dense_units").get<std::size_t>();
  s.num_classes = j.at("num_classes").get<std::size_t>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  return s;
}

template <typename T>
std::string checkpoint_document(const Model<T>& m) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : m.parameters()) {
    nlohmann::json data = nlohmann::json::array();
    data.get_ref<nlohmann::json::array_t&>().reserve(t->size());
    for (T v : t->values()) data.push_back(static_cast<double>(v));
    params[name] = {{"shape", t->shape()}, {"data", std::move(data)}};
  }
  nlohmann::json doc = {{"format_version", kCheckpointVersion},
                        {"arch", to_string(m.spec().arch)},
                        {"spec", spec_to_json(m.spec())},
                        {"params", std::move(params)}};
  return doc.dump() + "\n";
}

template <typename T>
void save_checkpoint(const Model<T>& m, const std::filesystem::path& path) {
  io::write_atomic(path, checkpoint_document(m));
}

template <typename T = float>
Model<T> parse_checkpoint(const std::string& text, std::optional<Arch> expected = std::nullopt) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("malformed checkpoint document: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointVersion)
      throw CheckpointError("checkpoint format_version " + std::to_string(version) +
                            " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    const ModelSpec spec = spec_from_json(doc.at("spec"));
    if (doc.at("arch").get<std::string>() != to_string(spec.arch))
      throw CheckpointError("checkpoint arch tag disagrees with its spec");
    if (expected && *expected != spec.arch)
      throw CheckpointError(std::string("checkpoint holds a ") + to_string(spec.arch) +
                            "-head model, but a " + to_string(*expected) + "-head model was requested");
    Model<T> m(spec);
    const auto& params = doc.at("params");
    std::set<std::string> seen;
    for (auto& [name, t] : m.parameters()) {
      if (!params.contains(name)) throw CheckpointError("checkpoint is missing parameter " + name);
      const auto& entry = params.at(name);
      if (entry.at("shape").template get<Shape>() != t->shape())
        throw CheckpointError("checkpoint parameter " + name + " has shape " +
                              shape_str(entry.at("shape").template get<Shape>()) + ", model expects " +
                              shape_str(t->shape()));
      const auto& data = entry.at("data");
      if (data.size() != t->size())
        throw CheckpointError("checkpoint parameter " + name + " has " +
                              std::to_string(data.size()) + " values, expected " +
                              std::to_string(t->size()));
      for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = static_cast<T>(data[i].template get<double>());
      seen.insert(name);
    }
    if (seen.size() != params.size()) throw CheckpointError("checkpoint has unknown parameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("invalid checkpoint spec: ") + e.what());
  }
}

template <typename T = float>
Model<T> load_checkpoint(const std::filesystem::path& path,
                         std::optional<Arch> expected = std::nullopt) {
  if (!std::filesystem::exists(path)) throw CheckpointError("checkpoint not found: " + path.string());
  return parse_checkpoint<T>(io::read_file(path), expected);
}

}  // namespace har
