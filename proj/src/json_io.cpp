#include "saog/json_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "saog/errors.hpp"
#include "saog/grammar.hpp"

namespace saog {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
    if (!j.is_object()) throw ValidationError(std::string("expected an object holding '") + name + "'");
    const auto it = j.find(name);
    if (it == j.end()) throw ValidationError(std::string("missing field '") + name + "'");
    return *it;
}

template <typename T>
T get_as(const json& j, const char* name) {
    const auto& v = field(j, name);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + name + "': " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("field '") + name + "': " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* name, T fallback) {
    if (!j.contains(name)) return fallback;
    return get_as<T>(j, name);
}

} // namespace

void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

void from_json(const json& j, Vec3& v) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw ValidationError("expected a 3-element numeric array");
    }
    v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const Weights& w) {
    j = json{{"relation", w.relation}, {"camera", w.camera}, {"height", w.height}, {"overlap", w.overlap},
             {"paper_literal_sign", w.paper_literal_sign}};
}

void from_json(const json& j, Weights& w) {
    w.relation = get_as<double>(j, "relation");
    w.camera = get_as<double>(j, "camera");
    w.height = get_as<double>(j, "height");
    w.overlap = get_or<double>(j, "overlap", 0.0);
    w.paper_literal_sign = get_or<bool>(j, "paper_literal_sign", false);
}

void to_json(json& j, const CameraModel& c) {
    j = json{{"position", c.position}, {"look_at", c.look_at},         {"up", c.up},
             {"vertical_fov", c.vertical_fov}, {"width", c.image_width}, {"height", c.image_height},
             {"near_clip", c.near_clip}};
}

void from_json(const json& j, CameraModel& c) {
    c.position = get_as<Vec3>(j, "position");
    c.look_at = get_as<Vec3>(j, "look_at");
    c.up = get_as<Vec3>(j, "up");
    c.vertical_fov = get_as<double>(j, "vertical_fov");
    c.image_width = get_as<int>(j, "width");
    c.image_height = get_as<int>(j, "height");
    c.near_clip = get_or<double>(j, "near_clip", 1e-3);
}

void to_json(json& j, const LocationHistogram& h) {
    j = json{{"bounds", {h.x_min, h.x_max, h.y_min, h.y_max}},
             {"bins", h.bins},
             {"sigma", h.sigma},
             {"epsilon", h.epsilon},
             {"mass", h.mass}};
}

void from_json(const json& j, LocationHistogram& h) {
    const auto b = get_as<std::vector<double>>(j, "bounds");
    if (b.size() != 4) throw ValidationError("field 'bounds': expected [x_min, x_max, y_min, y_max]");
    h.x_min = b[0];
    h.x_max = b[1];
    h.y_min = b[2];
    h.y_max = b[3];
    h.bins = get_as<int>(j, "bins");
    h.sigma = get_as<double>(j, "sigma");
    h.epsilon = get_as<double>(j, "epsilon");
    h.mass = get_as<std::vector<double>>(j, "mass");
}

void to_json(json& j, const GrammarSpec& s) {
    j = json::object();
    auto& configs = j["configs"] = json::array();
    for (const auto& c : s.configs) configs.push_back({{"objects", c.objects}, {"probability", c.probability}});
    auto& catalog = j["catalog"] = json::array();
    for (const auto& l : s.catalog) {
        catalog.push_back({{"label", l.label_index},
                           {"shape", l.shape},
                           {"color", l.color},
                           {"material", l.material},
                           {"probability", l.probability}});
    }
    auto& sizes = j["sizes"] = json::array();
    for (const auto& z : s.sizes) {
        sizes.push_back({{"name", z.name}, {"half_extent", z.half_extent}, {"probability", z.probability}});
    }
    auto& rels = j["relations"] = json::array();
    for (const auto& r : s.relation_types) {
        rels.push_back({{"name", r.name}, {"direction", r.direction}, {"prior", r.prior}});
    }
    j["weights"] = s.weights;
    j["camera"] = s.camera;
    j["histogram"] = s.location_hist;
}

void from_json(const json& j, GrammarSpec& s) {
    s = GrammarSpec{};
    for (const auto& c : field(j, "configs")) s.configs.push_back({get_as<int>(c, "objects"), get_as<double>(c, "probability")});
    for (const auto& l : field(j, "catalog")) {
        s.catalog.push_back({get_as<int>(l, "label"), get_as<std::string>(l, "shape"), get_as<std::string>(l, "color"),
                             get_as<std::string>(l, "material"), get_as<double>(l, "probability")});
    }
    for (const auto& z : field(j, "sizes")) {
        s.sizes.push_back(
            {get_as<std::string>(z, "name"), get_as<double>(z, "half_extent"), get_as<double>(z, "probability")});
    }
    for (const auto& r : field(j, "relations")) {
        s.relation_types.push_back(
            {get_as<std::string>(r, "name"), get_as<Vec3>(r, "direction"), get_as<double>(r, "prior")});
    }
    s.weights = get_as<Weights>(j, "weights");
    s.camera = get_as<CameraModel>(j, "camera");
    s.location_hist = get_as<LocationHistogram>(j, "histogram");
}

void to_json(json& j, const ObjectInstance& o) {
    j = json{{"label", o.label_index},
             {"size", o.size_name},
             {"half_extent", o.half_extent},
             {"location", o.location},
             {"rotation", o.rotation}};
}

void from_json(const json& j, ObjectInstance& o) {
    o.label_index = get_as<int>(j, "label");
    o.size_name = get_as<std::string>(j, "size");
    o.half_extent = get_as<double>(j, "half_extent");
    o.location = get_as<Vec3>(j, "location");
    o.rotation = get_or<double>(j, "rotation", 0.0);
}

void to_json(json& j, const Relation& r) {
    j = json{{"type", r.relation_type}, {"subject", r.subject}, {"object", r.object}};
}

void from_json(const json& j, Relation& r) {
    r.relation_type = get_as<int>(j, "type");
    r.subject = get_as<int>(j, "subject");
    r.object = get_as<int>(j, "object");
}

void to_json(json& j, const ParseGraph& g) {
    j = json{{"n_s", g.n_s}, {"objects", g.objects}, {"relations", g.relations}};
}

void from_json(const json& j, ParseGraph& g) {
    g.objects = get_as<std::vector<ObjectInstance>>(j, "objects");
    g.relations = get_or<std::vector<Relation>>(j, "relations", {});
    g.n_s = get_or<int>(j, "n_s", static_cast<int>(g.objects.size()));
}

void to_json(json& j, const EnergyBreakdown& e) {
    j = json{{"sum_relation", e.sum_relation},
             {"sum_camera", e.sum_camera},
             {"sum_height", e.sum_height},
             {"sum_overlap", e.sum_overlap},
             {"total", e.total}};
}

void to_json(json& j, const BBox2D& b) {
    j = json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"depth", b.depth}};
}

void to_json(json& j, const Diagnostic& d) { j = json{{"code", d.code}, {"index", d.index}, {"message", d.message}}; }

void to_json(json& j, const ChainConfig& c) {
    j = json{{"steps", c.steps},
             {"burn_in", c.burn_in},
             {"proposal_sigma_xy", c.proposal_sigma_xy},
             {"proposal_sigma_z", c.proposal_sigma_z},
             {"proposal_sigma_theta", c.proposal_sigma_theta},
             {"seed", c.seed},
             {"final_temperature", c.final_temperature}};
}

void from_json(const json& j, ChainConfig& c) {
    c.steps = get_or<int>(j, "steps", c.steps);
    c.burn_in = get_or<int>(j, "burn_in", c.burn_in);
    c.proposal_sigma_xy = get_or<double>(j, "proposal_sigma_xy", c.proposal_sigma_xy);
    c.proposal_sigma_z = get_or<double>(j, "proposal_sigma_z", c.proposal_sigma_z);
    c.proposal_sigma_theta = get_or<double>(j, "proposal_sigma_theta", c.proposal_sigma_theta);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.final_temperature = get_or<double>(j, "final_temperature", c.final_temperature);
}

void to_json(json& j, const SceneDataset& d) {
    j = json{{"source", d.source}, {"camera", d.camera}, {"graphs", d.graphs}};
    if (!d.image_paths.empty()) j["image_paths"] = d.image_paths;
}

void from_json(const json& j, SceneDataset& d) {
    d.source = get_or<std::string>(j, "source", "");
    d.camera = get_or<CameraModel>(j, "camera", CameraModel{});
    d.graphs = get_as<std::vector<ParseGraph>>(j, "graphs");
    d.image_paths = get_or<std::vector<std::string>>(j, "image_paths", {});
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": malformed JSON: " + e.what(), e.byte);
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

GrammarSpec load_spec(const std::filesystem::path& path) {
    auto spec = read_json_file(path).get<GrammarSpec>();
    validate_spec(spec);
    return spec;
}

} // namespace saog
