#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/projection.hpp"

using namespace saog;

namespace {

CameraModel axis_camera() {
    CameraModel cam;
    cam.position = {0, -10, 0};
    cam.look_at = {0, 0, 0};
    cam.up = {0, 0, 1};
    return cam;
}

bool inside(const BBox2D& b, const ImagePoint& p) {
    return p.u >= b.x0 - 1e-9 && p.u <= b.x1 + 1e-9 && p.v >= b.y0 - 1e-9 && p.v <= b.y1 + 1e-9;
}

} // namespace

TEST_CASE("optical axis projects to the image center") {
    const auto p = project_point(axis_camera(), {0, 0, 0});
    CHECK(p.u == doctest::Approx(240.0));
    CHECK(p.v == doctest::Approx(160.0));
    CHECK(p.depth == doctest::Approx(10.0));
}

TEST_CASE("points at or behind the camera are rejected") {
    CHECK_THROWS_AS(project_point(axis_camera(), {0, -10 + 1e-4, 0}), BehindCameraError);
    CHECK_THROWS_AS(project_point(axis_camera(), {0, -12, 0}), BehindCameraError);
}

TEST_CASE("vertical offset matches the homogeneous-matrix oracle") {
    auto cam = axis_camera();
    cam.vertical_fov = 60.0;
    const Vec3 p{0, 0, 1};
    const auto got = project_point(cam, p);
    const auto want = oracle::project_with_matrices(cam, p);
    CHECK(std::abs(got.v - want[1]) < 0.01);
    CHECK(std::abs(got.u - want[0]) < 0.01);
    CHECK(got.v < 160.0); // up in the world is up in the image
}

TEST_CASE("default camera agrees with the matrix oracle everywhere in the scene") {
    const CameraModel cam;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int k = 0; k < 500; ++k) {
        const Vec3 p{u(rng), u(rng), std::abs(u(rng)) * 0.5};
        const auto got = project_point(cam, p);
        const auto want = oracle::project_with_matrices(cam, p);
        CHECK(std::abs(got.u - want[0]) < 1e-6);
        CHECK(std::abs(got.v - want[1]) < 1e-6);
        const auto back = unproject(cam, got);
        CHECK((back - p).norm() < 1e-9);
    }
}

TEST_CASE("degenerate cameras are rejected") {
    CameraModel cam;
    cam.look_at = cam.position;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
    cam = CameraModel{};
    cam.up = (cam.look_at - cam.position).normalized();
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
    cam = CameraModel{};
    cam.vertical_fov = 180.0;
    CHECK_THROWS_AS(validate_camera(cam), ValidationError);
}

TEST_CASE("bounding boxes") {
    const CameraModel cam;
    SUBCASE("contain the projected center") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-3, 3), r(0, 360);
        for (int k = 0; k < 200; ++k) {
            const ObjectInstance o{0, "large", 0.7, {u(rng), u(rng), 0.7}, r(rng)};
            CHECK(inside(project_object_bbox(cam, o), project_point(cam, o.location)));
        }
    }
    SUBCASE("on-axis object is horizontally centered") {
        const ObjectInstance o{0, "large", 0.7, {0, 0, 0}, 0};
        const auto b = project_object_bbox(axis_camera(), o);
        CHECK(std::abs(0.5 * (b.x0 + b.x1) - 240.0) < 1.0);
    }
    SUBCASE("match the dense surface-sampling hull") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-4, 4), r(0, 360);
        for (int k = 0; k < 40; ++k) {
            const double h = k % 2 ? 0.35 : 0.7;
            const ObjectInstance o{0, "s", h, {u(rng), u(rng), h}, r(rng)};
            const auto got = project_object_bbox(cam, o);
            const auto want = oracle::dense_bbox(cam, o, 10000, 100 + k);
            CHECK(std::abs(got.x0 - want.x0) < 1.0);
            CHECK(std::abs(got.x1 - want.x1) < 1.0);
            CHECK(std::abs(got.y0 - want.y0) < 1.0);
            CHECK(std::abs(got.y1 - want.y1) < 1.0);
        }
    }
    SUBCASE("objects straddling the near plane are clipped to the image") {
        const ObjectInstance o{0, "s", 1.0, cam.position, 0};
        const auto b = project_object_bbox(cam, o);
        CHECK(b.x0 >= 0.0);
        CHECK(b.x1 <= 480.0);
        CHECK(b.y0 >= 0.0);
        CHECK(b.y1 <= 320.0);
    }
    SUBCASE("objects entirely behind the camera") {
        const Vec3 behind = cam.position + (cam.position - cam.look_at).normalized() * 5.0;
        CHECK_THROWS_AS(project_object_bbox(cam, ObjectInstance{0, "s", 0.35, behind, 0}), BehindCameraError);
    }
}

TEST_CASE("label embedding") {
    CHECK(label_embedding(0) == std::array<float, 3>{0.125f, 0.125f, 0.125f});
    CHECK(label_embedding(47) == std::array<float, 3>{0.625f, 0.875f, 0.875f});
    std::set<std::array<float, 3>> seen;
    for (int l = 0; l < 48; ++l) seen.insert(label_embedding(l));
    CHECK(seen.size() == 48);
    CHECK_THROWS_AS(label_embedding(64), ValidationError);
    CHECK_THROWS_AS(label_embedding(-1), ValidationError);
}

TEST_CASE("rotation bins") {
    CHECK(rotation_bin(0.0) == 0);
    CHECK(rotation_bin(15.0) == 1);
    CHECK(rotation_bin(89.9) == 5);
    CHECK(rotation_bin(105.0) == 1);
    CHECK(rotation_bin(-10.0) == 5);
    const auto hot = rotation_onehot(200.0); // 20 mod 90
    CHECK(hot == std::array<float, 6>{0, 1, 0, 0, 0, 0});
}

TEST_CASE("instance maps") {
    const auto spec = default_clevr_spec();
    SUBCASE("empty scene is all zero") {
        const auto map = rasterize_instance_map(ParseGraph{}, spec);
        CHECK(map.channels == 9);
        CHECK(map.data.size() == 480u * 320u * 9u);
        for (float v : map.data) REQUIRE(v == 0.0f);
    }
    SUBCASE("nearer object wins every overlap pixel") {
        const CameraModel& cam = spec.camera;
        const Vec3 fwd = (cam.look_at - cam.position).normalized();
        ParseGraph g;
        g.objects = {ObjectInstance{5, "large", 0.7, cam.position + fwd * 12.0, 10.0},
                     ObjectInstance{40, "small", 0.35, cam.position + fwd * 8.0, 50.0}};
        g.n_s = 2;
        const auto map = rasterize_instance_map(g, spec);
        const auto far_box = project_object_bbox(cam, g.objects[0]);
        const auto near_box = project_object_bbox(cam, g.objects[1]);
        CHECK(far_box.depth == doctest::Approx(12.0));
        CHECK(near_box.depth == doctest::Approx(8.0));
        const auto near_emb = label_embedding(40);
        const auto far_emb = label_embedding(5);
        int overlap = 0, far_only = 0;
        for (int row = 0; row < map.height; ++row) {
            for (int col = 0; col < map.width; ++col) {
                const double cx = col + 0.5, cy = row + 0.5;
                const bool in_near = cx >= near_box.x0 && cx < near_box.x1 && cy >= near_box.y0 && cy < near_box.y1;
                const bool in_far = cx >= far_box.x0 && cx < far_box.x1 && cy >= far_box.y0 && cy < far_box.y1;
                if (in_near && in_far) {
                    ++overlap;
                    REQUIRE(map.at(row, col, 0) == near_emb[0]);
                    REQUIRE(map.at(row, col, 2) == near_emb[2]);
                    REQUIRE(map.at(row, col, 3 + rotation_bin(50.0)) == 1.0f);
                } else if (in_far) {
                    ++far_only;
                    REQUIRE(map.at(row, col, 0) == far_emb[0]);
                    REQUIRE(map.at(row, col, 3 + rotation_bin(10.0)) == 1.0f);
                } else if (!in_near) {
                    REQUIRE(map.at(row, col, 0) == 0.0f);
                }
            }
        }
        CHECK(overlap > 0);
        CHECK(far_only > 0);
        // Input order does not matter.
        std::swap(g.objects[0], g.objects[1]);
        CHECK(rasterize_instance_map(g, spec) == map);
    }
}

TEST_CASE("SIMAP1 encoding") {
    const auto spec = default_clevr_spec();
    ParseGraph g;
    g.objects = {ObjectInstance{7, "large", 0.7, {0.5, 0.5, 0.7}, 33}};
    g.n_s = 1;
    const auto map = rasterize_instance_map(g, spec);
    const auto bytes = encode_instance_map(map);
    CHECK(bytes.size() == 6 + 12 + 480u * 320u * 9u * 4u);
    CHECK(std::string(bytes.begin(), bytes.begin() + 6) == "SIMAP1");
    CHECK(decode_instance_map(bytes) == map);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_instance_map(bad), FormatError);
    auto short_bytes = bytes;
    short_bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_instance_map(short_bytes), FormatError);

    const auto ppm = instance_map_ppm(map);
    CHECK(std::string(ppm.begin(), ppm.begin() + 2) == "P6");
}
