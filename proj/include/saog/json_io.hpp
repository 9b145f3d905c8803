#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "saog/dataset.hpp"
#include "saog/learning.hpp"
#include "saog/model.hpp"
#include "saog/projection.hpp"

namespace saog {

// JSON mappings. Every from_json throws ValidationError naming the offending
// field, so service handlers can report field-level problems.

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const Weights& w);
void from_json(const nlohmann::json& j, Weights& w);
void to_json(nlohmann::json& j, const CameraModel& c);
void from_json(const nlohmann::json& j, CameraModel& c);
void to_json(nlohmann::json& j, const LocationHistogram& h);
void from_json(const nlohmann::json& j, LocationHistogram& h);
void to_json(nlohmann::json& j, const GrammarSpec& s);
void from_json(const nlohmann::json& j, GrammarSpec& s);
void to_json(nlohmann::json& j, const ObjectInstance& o);
void from_json(const nlohmann::json& j, ObjectInstance& o);
void to_json(nlohmann::json& j, const Relation& r);
void from_json(const nlohmann::json& j, Relation& r);
void to_json(nlohmann::json& j, const ParseGraph& g);
void from_json(const nlohmann::json& j, ParseGraph& g);
void to_json(nlohmann::json& j, const EnergyBreakdown& e);
void to_json(nlohmann::json& j, const BBox2D& b);
void to_json(nlohmann::json& j, const Diagnostic& d);
void to_json(nlohmann::json& j, const ChainConfig& c);
void from_json(const nlohmann::json& j, ChainConfig& c);
void to_json(nlohmann::json& j, const SceneDataset& d);
void from_json(const nlohmann::json& j, SceneDataset& d);

/// Reads and parses a JSON file; parse failures become FormatError with offset.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

GrammarSpec load_spec(const std::filesystem::path& path);

} // namespace saog
