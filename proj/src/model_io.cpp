#include "ssa/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "ssa/error.hpp"

namespace ssa {

using nlohmann::json;

namespace {

template <class T>
T require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kFormatError, key,
                std::string("missing key '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, key,
                std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void check_format_version(const std::string& version, int supported_major) {
  int major = -1;
  try {
    std::size_t used = 0;
    major = std::stoi(version, &used);
    if (used != version.size() && version[used] != '.') major = -1;
  } catch (const std::exception&) {
    major = -1;
  }
  if (major != supported_major) {
    throw Error(ErrorCode::kUnsupportedVersion, "format_version",
                "unsupported format version '" + version + "'");
  }
}

json schema_to_json(const Schema& schema) {
  json columns = json::array();
  for (const auto& c : schema.columns()) {
    columns.push_back(
        {{"name", c.name}, {"kind", to_string(c.kind)}, {"group", c.group}});
  }
  return {{"groups", schema.groups()}, {"columns", columns}};
}

SchemaPtr schema_from_json(const json& j) {
  auto groups = require<std::vector<std::string>>(j, "groups");
  std::vector<SchemaColumn> columns;
  for (const auto& c : require<json>(j, "columns")) {
    auto kind = parse_encoding_kind(require<std::string>(c, "kind"));
    if (!kind) throw Error(ErrorCode::kFormatError, "kind", "bad column kind");
    columns.push_back({require<std::string>(c, "name"), *kind,
                       require<std::size_t>(c, "group")});
  }
  return std::make_shared<const Schema>(std::move(columns), std::move(groups));
}

json hyperparams_to_json(const HyperParams& hp) {
  return {{"n_trees", hp.n_trees},
          {"max_depth", hp.max_depth ? json(*hp.max_depth) : json(nullptr)},
          {"min_samples_leaf", hp.min_samples_leaf},
          {"features_per_split", to_string(hp.features_per_split)},
          {"bootstrap", hp.bootstrap},
          {"seed", hp.seed}};
}

HyperParams hyperparams_from_json(const json& j) {
  HyperParams hp;
  hp.n_trees = require<int>(j, "n_trees");
  const json& depth = require<json>(j, "max_depth");
  if (!depth.is_null()) hp.max_depth = require<int>(j, "max_depth");
  hp.min_samples_leaf = require<int>(j, "min_samples_leaf");
  auto fps = parse_feature_subset(require<std::string>(j, "features_per_split"));
  if (!fps) {
    throw Error(ErrorCode::kFormatError, "features_per_split", "bad value");
  }
  hp.features_per_split = *fps;
  hp.bootstrap = require<bool>(j, "bootstrap");
  hp.seed = require<std::uint64_t>(j, "seed");
  hp.check();
  return hp;
}

json model_to_json(const TreeEnsembleModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
      nodes.push_back(
          {n.feature, n.threshold, n.left, n.right, n.value, n.coverage});
    }
    trees.push_back(std::move(nodes));
  }
  return {
      {"format", kModelFormatName},
      {"format_version", kModelFormatVersion},
      {"kind", to_string(model.kind)},
      {"target",
       {{"name", model.target.name},
        {"lo", model.target.lo},
        {"hi", model.target.hi}}},
      {"schema", schema_to_json(*model.schema)},
      {"hyperparams", hyperparams_to_json(model.hyperparams)},
      {"metadata",
       {{"seed", model.metadata.seed},
        {"dataset_fingerprint", model.metadata.dataset_fingerprint},
        {"timestamp", model.metadata.timestamp},
        {"training_rows", model.metadata.training_rows}}},
      {"node_fields",
       {"feature", "threshold", "left", "right", "value", "coverage"}},
      {"trees", std::move(trees)},
  };
}

TreeEnsembleModel model_from_json(const json& j) {
  if (require<std::string>(j, "format") != kModelFormatName) {
    throw Error(ErrorCode::kFormatError, "format", "not a tree ensemble file");
  }
  check_format_version(require<std::string>(j, "format_version"), 1);

  TreeEnsembleModel model;
  auto kind = parse_model_kind(require<std::string>(j, "kind"));
  if (!kind) throw Error(ErrorCode::kFormatError, "kind", "unknown model kind");
  model.kind = *kind;
  const json& target = require<json>(j, "target");
  model.target = {require<std::string>(target, "name"),
                  require<double>(target, "lo"), require<double>(target, "hi")};
  model.schema = schema_from_json(require<json>(j, "schema"));
  model.hyperparams = hyperparams_from_json(require<json>(j, "hyperparams"));
  const json& meta = require<json>(j, "metadata");
  model.metadata.seed = require<std::uint64_t>(meta, "seed");
  model.metadata.dataset_fingerprint =
      require<std::string>(meta, "dataset_fingerprint");
  model.metadata.timestamp = require<std::string>(meta, "timestamp");
  model.metadata.training_rows = require<std::size_t>(meta, "training_rows");

  const auto n_cols = static_cast<int>(model.schema->size());
  for (const auto& jt : require<json>(j, "trees")) {
    std::vector<TreeNode> nodes;
    for (const auto& jn : jt) {
      if (!jn.is_array() || jn.size() != 6) {
        throw Error(ErrorCode::kFormatError, "trees", "node needs 6 fields");
      }
      TreeNode n;
      try {
        n.feature = jn[0].get<int>();
        n.threshold = jn[1].get<double>();
        n.left = jn[2].get<int>();
        n.right = jn[3].get<int>();
        n.value = jn[4].get<double>();
        n.coverage = jn[5].get<std::int64_t>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kFormatError, "trees", e.what());
      }
      nodes.push_back(n);
    }
    const auto size = static_cast<int>(nodes.size());
    if (size == 0) throw Error(ErrorCode::kFormatError, "trees", "empty tree");
    for (int i = 0; i < size; ++i) {
      const auto& n = nodes[i];
      if (n.is_leaf()) continue;
      if (n.feature >= n_cols || n.left <= i || n.right <= i ||
          n.left >= size || n.right >= size) {
        throw Error(ErrorCode::kFormatError, "trees", "invalid tree topology");
      }
    }
    model.trees.emplace_back(std::move(nodes));
  }
  if (model.trees.empty()) {
    throw Error(ErrorCode::kFormatError, "trees", "model has no trees");
  }
  return model;
}

std::string serialize_model(const TreeEnsembleModel& model) {
  return model_to_json(model).dump() + "\n";
}

TreeEnsembleModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, "", e.what());
  }
  return model_from_json(j);
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, path, "cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoError, path, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, path, ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void save_model(const TreeEnsembleModel& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

TreeEnsembleModel load_model(const std::string& path) {
  return parse_model(read_file(path));
}

}  // namespace ssa
