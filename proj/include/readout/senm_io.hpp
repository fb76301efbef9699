#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "readout/senm.hpp"

namespace readout::senm {

inline constexpr int kSpecSchemaVersion = 1;

// JSON form of an ensemble model; see README for the schema. Throws
// ParseError naming the offending field.
SenmModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const SenmModel& model);

SenmModel load_model(const std::filesystem::path& path);
SenmModel parse_model(std::string_view text);

}  // namespace readout::senm
