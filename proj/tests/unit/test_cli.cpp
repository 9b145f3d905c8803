#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "oracles.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"
#include "saog/projection.hpp"

using namespace saog;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(SAOG_SOURCE_DIR) / "tests" / "fixtures";

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "saog_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SAOG_CLI_PATH) + " " + args + " >" + (scratch() / "stdout").string() +
                            " 2>" + (scratch() / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("sample is deterministic for a fixed seed") {
    const auto a = scratch() / "a.json", b = scratch() / "b.json";
    REQUIRE(run("sample -n 5 --seed 11 --steps 300 -o " + a.string()) == 0);
    REQUIRE(run("sample -n 5 --seed 11 --steps 300 -o " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(json::parse(slurp(a))["graphs"].size() == 5);
}

TEST_CASE("infer matches the brute-force oracle") {
    const auto spec = default_clevr_spec();
    auto g = json::parse(slurp(kFixtures / "scene_clevr6.json")).get<ParseGraph>();
    g.objects.resize(3);
    g.n_s = 3;
    g.relations.clear();
    const auto in = scratch() / "three.json", out = scratch() / "three_out.json";
    std::ofstream(in) << json(g).dump();
    REQUIRE(run("infer --objects " + in.string() + " -o " + out.string()) == 0);
    const auto got = json::parse(slurp(out))["relations"].get<std::vector<Relation>>();
    auto want = oracle::brute_force_map(g.objects, spec);
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    std::sort(want.begin(), want.end());
    CHECK(sorted == want);
}

TEST_CASE("project on the empty scene writes an all-zero payload") {
    const auto out = scratch() / "empty.simap";
    REQUIRE(run("project --graph " + (kFixtures / "scene_empty.json").string() + " -o " + out.string()) == 0);
    const auto bytes = slurp(out);
    const std::vector<std::uint8_t> raw(bytes.begin(), bytes.end());
    const auto map = decode_instance_map(raw);
    CHECK(map.width == 480);
    CHECK(map.height == 320);
    for (float v : map.data) REQUIRE(v == 0.0f);
}

TEST_CASE("encode and decode round trip") {
    const auto spg = scratch() / "g.spg", back = scratch() / "g.json";
    const auto src = kFixtures / "scene_clevr6.json";
    REQUIRE(run("encode --graph " + src.string() + " -o " + spg.string()) == 0);
    REQUIRE(run("decode --in " + spg.string() + " -o " + back.string()) == 0);
    const auto a = json::parse(slurp(src)).get<ParseGraph>();
    const auto b = json::parse(slurp(back)).get<ParseGraph>();
    CHECK(a.n_s == b.n_s);
    CHECK(a.relations == b.relations);
    REQUIRE(a.objects.size() == b.objects.size());
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
        CHECK((a.objects[i].location - b.objects[i].location).norm() < 1e-6);
        CHECK(a.objects[i].label_index == b.objects[i].label_index);
    }
}

TEST_CASE("default-spec emits a loadable spec") {
    const auto out = scratch() / "spec.json";
    REQUIRE(run("default-spec -o " + out.string()) == 0);
    CHECK(run("--spec " + out.string() + " sample -n 1 --steps 10") == 0);
}

TEST_CASE("usage errors exit with status 2") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("sample --bogus") == 2);
    CHECK(run("infer --objects /nonexistent.json") == 2);
}

TEST_CASE("runtime errors exit with status 1") {
    const auto junk = scratch() / "junk.spg";
    std::ofstream(junk, std::ios::binary) << "SPG1xx";
    CHECK(run("decode --in " + junk.string()) == 1);
    CHECK(slurp(scratch() / "stderr").find("at byte") != std::string::npos);
}
