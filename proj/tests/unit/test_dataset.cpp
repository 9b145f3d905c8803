#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "saog/dataset.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"
#include "saog/mcmc.hpp"

using namespace saog;
using nlohmann::json;

namespace {

json clevr_object(const char* shape, const char* color, Vec3 at) {
    return {{"shape", shape},           {"color", color},      {"material", "rubber"},
            {"size", "small"},          {"rotation", 12.0},    {"3d_coords", {at.x, at.y, 0.35}},
            {"pixel_coords", {1, 2, 3}}};
}

/// Object 1 stands to the right of and behind object 0 in CLEVR's frame.
json two_object_scenes() {
    const auto spec = default_clevr_spec();
    const Vec3 right = spec.relation_types[1].direction;
    const Vec3 front = spec.relation_types[0].direction;
    const Vec3 p1 = right * 2.0 - front * 1.0;
    json scene{{"image_filename", "CLEVR_x_000000.png"},
               {"objects", {clevr_object("cube", "red", {0, 0, 0}), clevr_object("sphere", "blue", p1)}},
               {"relationships",
                {{"right", {{1}, json::array()}},
                 {"left", {json::array(), {0}}},
                 {"front", {json::array(), {0}}},
                 {"behind", {{1}, json::array()}}}}};
    return {{"info", {{"split", "test"}}}, {"scenes", {scene}}};
}

} // namespace

TEST_CASE("CLEVR relationships follow the listed-object-stands-relation convention") {
    const auto spec = default_clevr_spec();
    const auto ds = ingest_clevr_scenes(two_object_scenes(), spec);
    REQUIRE(ds.graphs.size() == 1);
    const auto& g = ds.graphs[0];
    CHECK(g.n_s == 2);
    CHECK(g.objects.size() == 2);
    CHECK(g.objects[0].label_index == *spec.find_label("cube", "red", "rubber"));
    CHECK(g.objects[1].location.x == doctest::Approx((spec.relation_types[1].direction * 2.0 -
                                                       spec.relation_types[0].direction)
                                                          .x));
    // right[0] = [1]: object 1 is right of object 0. front[1] = [0]: object 0 is in front of object 1.
    const std::vector<Relation> want{{0, 0, 1}, {1, 1, 0}};
    CHECK(g.relations == want);
    CHECK(ds.image_paths[0] == "CLEVR_x_000000.png");
}

TEST_CASE("relations outside the filter are dropped") {
    const auto spec = default_clevr_spec();
    IngestOptions opt;
    opt.relation_filter = {"right"};
    const auto ds = ingest_clevr_scenes(two_object_scenes(), spec, opt);
    CHECK(ds.graphs[0].relations == std::vector<Relation>{{1, 1, 0}});
    opt.relation_filter = {"left"};
    CHECK_THROWS_AS(ingest_clevr_scenes(two_object_scenes(), spec, opt), UnknownSymbolError);
}

TEST_CASE("reversed annotations are caught by the convention check") {
    const auto spec = default_clevr_spec();
    auto doc = two_object_scenes();
    doc["scenes"][0]["relationships"]["right"] = {json::array(), {0}};
    CHECK_THROWS_AS(ingest_clevr_scenes(doc, spec), ConventionError);
}

TEST_CASE("unknown attributes and bad structure") {
    const auto spec = default_clevr_spec();
    auto doc = two_object_scenes();
    doc["scenes"][0]["objects"][1]["color"] = "magenta";
    CHECK_THROWS_AS(ingest_clevr_scenes(doc, spec), UnknownSymbolError);
    doc = two_object_scenes();
    doc["scenes"][0]["relationships"]["right"] = {{1}};
    CHECK_THROWS_AS(ingest_clevr_scenes(doc, spec), ValidationError);
    CHECK_THROWS_AS(ingest_clevr_scenes(json{{"images", 1}}, spec), ValidationError);
}

TEST_CASE("malformed files report a byte offset") {
    const auto path = std::filesystem::temp_directory_path() / "saog_bad_scenes.json";
    {
        std::ofstream out(path);
        out << "{\"scenes\": [ {\"objects\": [}";
    }
    try {
        ingest_clevr_scenes(path, default_clevr_spec());
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.offset() > 0);
    }
    std::filesystem::remove(path);
}

TEST_CASE("export then ingest is lossless for in-scope fields") {
    const auto spec = default_clevr_spec();
    ChainConfig chain;
    chain.steps = 500;
    auto ds = synth_dataset(spec, 20, chain, 3);
    for (auto& g : ds.graphs) g.relations = relations_from_layout(g.objects, spec.relation_types);
    const auto doc = export_clevr_scenes(ds, spec);
    const auto back = ingest_clevr_scenes(doc, spec);
    REQUIRE(back.graphs.size() == ds.graphs.size());
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) CHECK(back.graphs[i] == ds.graphs[i]);
    const auto dirs = clevr_relation_directions(doc);
    REQUIRE(dirs.size() == 2);
}

TEST_CASE("synthetic datasets") {
    const auto spec = default_clevr_spec();
    ChainConfig chain;
    chain.steps = 200;
    const auto a = synth_dataset(spec, 100, chain, 7);
    const auto b = synth_dataset(spec, 100, chain, 7);
    CHECK(a.graphs.size() == 100);
    CHECK(json(a).dump() == json(b).dump());
    for (const auto& g : a.graphs) CHECK(validate(spec, g).empty());
    CHECK_THROWS_AS(synth_dataset(spec, 0, chain, 7), ValidationError);
}

TEST_CASE("dataset JSON round trip") {
    const auto spec = default_clevr_spec();
    ChainConfig chain;
    chain.steps = 50;
    const auto ds = synth_dataset(spec, 5, chain, 1);
    const auto back = json(ds).get<SceneDataset>();
    CHECK(back.graphs == ds.graphs);
    CHECK(back.source == ds.source);
    CHECK(back.camera == ds.camera);
}
