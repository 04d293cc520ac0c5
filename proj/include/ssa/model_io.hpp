#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "ssa/encoding.hpp"
#include "ssa/forest.hpp"

namespace ssa {

/// Current model file format. Loaders accept any 1.x file and reject other
/// major versions.
inline constexpr std::string_view kModelFormatName = "ssa-tree-ensemble";
inline constexpr std::string_view kModelFormatVersion = "1.0";

nlohmann::json schema_to_json(const Schema& schema);
SchemaPtr schema_from_json(const nlohmann::json& j);

nlohmann::json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TreeEnsembleModel& model);
TreeEnsembleModel model_from_json(const nlohmann::json& j);

std::string serialize_model(const TreeEnsembleModel& model);
TreeEnsembleModel parse_model(std::string_view text);

void save_model(const TreeEnsembleModel& model, const std::string& path);
TreeEnsembleModel load_model(const std::string& path);

/// Accepts "1", "1.0", "1.3"; throws UnsupportedVersion for other majors.
void check_format_version(const std::string& version, int supported_major);

/// Writes to path.tmp then renames, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace ssa
