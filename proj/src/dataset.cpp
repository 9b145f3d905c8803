#include "saog/dataset.hpp"

#include <cmath>

#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"
#include "saog/random.hpp"

namespace saog {

using nlohmann::json;

namespace {

std::string scene_name(const json& scene, std::size_t index) {
    if (scene.is_object() && scene.contains("image_filename") && scene["image_filename"].is_string()) {
        return "scene " + std::to_string(index) + " (" + scene["image_filename"].get<std::string>() + ")";
    }
    return "scene " + std::to_string(index);
}

std::string str_field(const json& obj, const char* name, const std::string& where) {
    if (!obj.contains(name) || !obj[name].is_string()) {
        throw ValidationError(where + ": missing string field '" + name + "'");
    }
    return obj[name].get<std::string>();
}

double wrap_degrees(double theta) {
    double t = std::fmod(theta, 360.0);
    if (t < 0.0) t += 360.0;
    return t >= 360.0 ? 0.0 : t;
}

} // namespace

SceneDataset ingest_clevr_scenes(const json& doc, const GrammarSpec& spec, const IngestOptions& options) {
    if (!doc.is_object() || !doc.contains("scenes") || !doc["scenes"].is_array()) {
        throw ValidationError("CLEVR annotations need a top-level 'scenes' array");
    }
    std::vector<std::pair<std::string, int>> kept;
    for (const auto& name : options.relation_filter) {
        const auto t = spec.relation_index(name);
        if (!t) throw UnknownSymbolError("relation '" + name + "' is not defined by the grammar");
        kept.emplace_back(name, static_cast<int>(*t));
    }

    SceneDataset out;
    out.source = "clevr";
    out.camera = spec.camera;
    std::size_t checked = 0;
    std::size_t contradicted = 0;
    const auto& scenes = doc["scenes"];
    for (std::size_t k = 0; k < scenes.size(); ++k) {
        const auto& scene = scenes[k];
        const auto where = scene_name(scene, k);
        if (!scene.is_object() || !scene.contains("objects") || !scene["objects"].is_array()) {
            throw ValidationError(where + ": missing 'objects' array");
        }
        ParseGraph g;
        for (std::size_t i = 0; i < scene["objects"].size(); ++i) {
            const auto& obj = scene["objects"][i];
            const auto at = where + ", object " + std::to_string(i);
            const auto shape = str_field(obj, "shape", at);
            const auto color = str_field(obj, "color", at);
            const auto material = str_field(obj, "material", at);
            const auto label = spec.find_label(shape, color, material);
            if (!label) {
                throw UnknownSymbolError(at + ": unknown label " + shape + "/" + color + "/" + material);
            }
            const auto size_name = str_field(obj, "size", at);
            const auto size = spec.size_index(size_name);
            if (!size) throw UnknownSymbolError(at + ": unknown size '" + size_name + "'");

            ObjectInstance o;
            o.label_index = *label;
            o.size_name = size_name;
            o.half_extent = spec.sizes[*size].half_extent;
            try {
                o.location = obj.at("3d_coords").get<Vec3>();
                o.rotation = wrap_degrees(obj.value("rotation", 0.0));
            } catch (const std::exception& e) {
                throw ValidationError(at + ": bad coordinates: " + e.what());
            }
            g.objects.push_back(o);
        }
        g.n_s = static_cast<int>(g.objects.size());

        const auto n = static_cast<int>(g.objects.size());
        if (scene.contains("relationships")) {
            const auto& rels = scene["relationships"];
            for (const auto& [name, type] : kept) {
                if (!rels.contains(name)) continue;
                const auto& lists = rels[name];
                if (!lists.is_array() || static_cast<int>(lists.size()) != n) {
                    throw ValidationError(where + ": relationships." + name + " must hold one list per object");
                }
                for (int i = 0; i < n; ++i) {
                    for (const auto& jv : lists[i]) {
                        const int j = jv.get<int>();
                        if (j < 0 || j >= n || j == i) {
                            throw ValidationError(where + ": relationships." + name + " has bad index " +
                                                  std::to_string(j));
                        }
                        // Listed j stands `name` of i.
                        g.relations.push_back({type, j, i});
                        const Vec3 offset = g.objects[j].location - g.objects[i].location;
                        ++checked;
                        if (spec.relation_types[type].direction.dot(offset) <= 0.0) ++contradicted;
                    }
                }
            }
        }
        canonicalize_relations(g.relations);
        out.graphs.push_back(std::move(g));
        out.image_paths.push_back(scene.value("image_filename", std::string{}));
    }
    if (checked > 0 && static_cast<double>(contradicted) / checked > options.max_inconsistent_fraction) {
        throw ConventionError(std::to_string(contradicted) + " of " + std::to_string(checked) +
                              " imported relations contradict the relation directions; the coordinate "
                              "convention does not match the annotations");
    }
    return out;
}

SceneDataset ingest_clevr_scenes(const std::filesystem::path& path, const GrammarSpec& spec,
                                 const IngestOptions& options) {
    auto ds = ingest_clevr_scenes(read_json_file(path), spec, options);
    ds.source = path.string();
    return ds;
}

json export_clevr_scenes(const SceneDataset& dataset, const GrammarSpec& spec) {
    json scenes = json::array();
    for (std::size_t k = 0; k < dataset.graphs.size(); ++k) {
        const auto& g = dataset.graphs[k];
        json scene;
        scene["image_index"] = k;
        if (k < dataset.image_paths.size() && !dataset.image_paths[k].empty()) {
            scene["image_filename"] = dataset.image_paths[k];
        }
        json objects = json::array();
        for (const auto& o : g.objects) {
            const auto& l = spec.catalog.at(o.label_index);
            objects.push_back({{"shape", l.shape},
                               {"color", l.color},
                               {"material", l.material},
                               {"size", o.size_name},
                               {"3d_coords", o.location},
                               {"rotation", o.rotation}});
        }
        scene["objects"] = objects;
        json rels = json::object();
        json directions = json::object();
        for (std::size_t t = 0; t < spec.relation_types.size(); ++t) {
            std::vector<std::vector<int>> lists(g.objects.size());
            for (const auto& r : g.relations) {
                if (r.relation_type == static_cast<int>(t)) lists[r.object].push_back(r.subject);
            }
            rels[spec.relation_types[t].name] = lists;
            directions[spec.relation_types[t].name] = spec.relation_types[t].direction;
        }
        scene["relationships"] = rels;
        scene["directions"] = directions;
        scenes.push_back(std::move(scene));
    }
    return json{{"info", {{"source", dataset.source}}}, {"scenes", scenes}};
}

std::vector<std::pair<std::string, Vec3>> clevr_relation_directions(const json& doc) {
    std::vector<std::pair<std::string, Vec3>> out;
    if (!doc.contains("scenes")) return out;
    for (const auto& scene : doc["scenes"]) {
        if (!scene.contains("directions")) continue;
        for (const auto& [name, v] : scene["directions"].items()) {
            Vec3 d = v.get<Vec3>();
            d.z = 0.0;
            if (d.norm() > 0.0) out.emplace_back(name, d.normalized());
        }
        break;
    }
    return out;
}

SceneDataset synth_dataset(const GrammarSpec& spec, int n, const ChainConfig& chain, std::uint64_t seed) {
    if (n < 1) throw ValidationError("synthetic dataset needs n >= 1");
    SceneDataset out;
    out.source = "synthetic:seed=" + std::to_string(seed);
    out.camera = spec.camera;
    out.graphs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.graphs.push_back(sample_parse_graph(spec, chain, derive_seed(seed, static_cast<std::uint64_t>(i))));
    }
    return out;
}

} // namespace saog
