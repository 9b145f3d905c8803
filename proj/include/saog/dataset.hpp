#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "saog/model.hpp"

namespace saog {

struct SceneDataset {
    std::vector<ParseGraph> graphs;
    std::string source;
    CameraModel camera;
    /// Image file per graph when ingested from annotations; metadata only.
    std::vector<std::string> image_paths;
};

struct IngestOptions {
    std::vector<std::string> relation_filter{"front", "right"};
    /// Fraction of imported relations allowed to contradict the geometry.
    double max_inconsistent_fraction = 0.01;
};

/// Converts CLEVR scene annotations into parse graphs.
///
/// `relationships[name][i]` lists every j that stands `name` of object i, so
/// each entry becomes Relation(name, subject = j, object = i). Coordinates are
/// taken as z-up with the ground at z = 0, which is CLEVR's own frame.
SceneDataset ingest_clevr_scenes(const nlohmann::json& doc, const GrammarSpec& spec,
                                 const IngestOptions& options = {});
SceneDataset ingest_clevr_scenes(const std::filesystem::path& path, const GrammarSpec& spec,
                                 const IngestOptions& options = {});

/// Inverse of ingestion for the in-scope fields.
nlohmann::json export_clevr_scenes(const SceneDataset& dataset, const GrammarSpec& spec);

/// Ground-plane unit directions keyed by relation name, read from the
/// `directions` block of the first scene that has one.
std::vector<std::pair<std::string, Vec3>> clevr_relation_directions(const nlohmann::json& doc);

SceneDataset synth_dataset(const GrammarSpec& spec, int n, const ChainConfig& chain, std::uint64_t seed);

} // namespace saog
