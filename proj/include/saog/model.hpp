#pragma once

// Domain types shared by every module: the grammar (a stochastic and-or graph
// over scenes), its parse graphs, and the camera and location models that the
// energy and projection stages consume.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saog/vec3.hpp"

namespace saog {

/// Child of the scene or-node: a configuration composing `objects` object nodes.
struct SceneConfig {
    int objects = 0;
    double probability = 0.0;
};

/// Terminal instance an object node can select (shape x color x material).
struct ObjectLabel {
    int label_index = 0;
    std::string shape;
    std::string color;
    std::string material;
    double probability = 0.0;
};

struct SizeClass {
    std::string name;
    double half_extent = 0.0;
    double probability = 0.0;
};

/// A spatial relation: `subject` stands in direction `direction` from `object`.
struct RelationType {
    std::string name;
    Vec3 direction;
    double prior = 0.5;
};

struct Weights {
    double relation = 1.0; // lambda_d
    double camera = 1.0;   // lambda_c
    double height = 1.0;   // lambda_h
    /// Pairwise ground-plane overlap hinge. Zero disables it.
    double overlap = 0.0;
    /// Use the relation hinge as literally printed, max(n.r, 0), instead of
    /// penalising violations. Only for comparison runs.
    bool paper_literal_sign = false;

    bool operator==(const Weights&) const = default;
};

struct CameraModel {
    Vec3 position{7.358891487121582, -6.925790786743164, 4.958309173583984};
    Vec3 look_at{0.0, 0.0, 0.0};
    Vec3 up{0.0, 0.0, 1.0};
    double vertical_fov = 33.9; // degrees
    int image_width = 480;
    int image_height = 320;
    /// Points closer than this along the view axis count as behind the camera.
    double near_clip = 1e-3;

    bool operator==(const CameraModel&) const = default;
};

/// Smoothed, floored ground-plane histogram of object locations.
struct LocationHistogram {
    double x_min = -3.3;
    double x_max = 3.3;
    double y_min = -3.3;
    double y_max = 3.3;
    int bins = 32;
    double sigma = 1.0;
    double epsilon = 1e-6;
    /// Row-major bins*bins masses; row = y bin, column = x bin.
    std::vector<double> mass;

    double at(int ix, int iy) const { return mass[static_cast<std::size_t>(iy) * bins + ix]; }
    /// Bin index of a ground-plane point, or nullopt outside the bounds.
    std::optional<std::array<int, 2>> bin_of(double x, double y) const;

    bool operator==(const LocationHistogram&) const = default;
};

struct GrammarSpec {
    std::vector<SceneConfig> configs;
    std::vector<ObjectLabel> catalog;
    std::vector<SizeClass> sizes;
    std::vector<RelationType> relation_types;
    Weights weights;
    CameraModel camera;
    LocationHistogram location_hist;

    int max_objects() const;
    int min_objects() const;
    std::optional<std::size_t> config_index(int n_objects) const;
    std::optional<std::size_t> size_index(const std::string& name) const;
    std::optional<std::size_t> relation_index(const std::string& name) const;
    /// Catalog entry matching the attributes, or nullopt.
    std::optional<int> find_label(const std::string& shape, const std::string& color,
                                  const std::string& material) const;
};

struct ObjectInstance {
    int label_index = 0;
    std::string size_name;
    double half_extent = 0.5;
    Vec3 location;         // object center, world units, z up
    double rotation = 0.0; // degrees in [0, 360)

    /// Height of the object's bottom above the ground plane z = 0.
    double bottom_height() const { return location.z - half_extent; }

    bool operator==(const ObjectInstance&) const = default;
};

struct Relation {
    int relation_type = 0;
    int subject = 0;
    int object = 0;

    auto operator<=>(const Relation&) const = default;
};

struct ParseGraph {
    int n_s = 0;
    std::vector<ObjectInstance> objects;
    /// Kept sorted and free of duplicates; see `canonicalize_relations`.
    std::vector<Relation> relations;

    bool operator==(const ParseGraph&) const = default;
};

/// Sorts relations by (type, subject, object) and drops duplicates.
void canonicalize_relations(std::vector<Relation>& relations);

struct EnergyBreakdown {
    double sum_relation = 0.0;
    double sum_camera = 0.0;
    double sum_height = 0.0;
    double sum_overlap = 0.0;
    double total = 0.0;
};

struct ChainConfig {
    int steps = 4000;
    int burn_in = 1000;
    double proposal_sigma_xy = 0.3;
    double proposal_sigma_z = 0.1;
    double proposal_sigma_theta = 10.0;
    std::uint64_t seed = 0;
    /// Temperature reached at the last step, annealed geometrically from 1.
    /// 1.0 samples the energy model itself.
    double final_temperature = 1.0;
};

/// One finding from validation or from edit diagnostics.
struct Diagnostic {
    std::string code;
    int index = -1; // object or relation index, -1 for graph-level findings
    std::string message;
};

} // namespace saog
