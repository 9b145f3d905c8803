#include "saog/projection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "saog/errors.hpp"

namespace saog {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr char kSimapMagic[6] = {'S', 'I', 'M', 'A', 'P', '1'};

} // namespace

void validate_camera(const CameraModel& cam) {
    const Vec3 view = cam.look_at - cam.position;
    if (view.norm() == 0.0) throw ValidationError("camera position coincides with look_at");
    if (cam.up.norm() == 0.0 || view.normalized().cross(cam.up.normalized()).norm() < 1e-9) {
        throw ValidationError("camera up vector is parallel to the view direction");
    }
    if (!(cam.vertical_fov > 0.0 && cam.vertical_fov < 180.0)) {
        throw ValidationError("camera vertical_fov must be in (0, 180) degrees");
    }
    if (cam.image_width <= 0 || cam.image_height <= 0) throw ValidationError("camera image size must be positive");
    if (!(cam.near_clip > 0.0)) throw ValidationError("camera near clip must be positive");
}

CameraFrame camera_frame(const CameraModel& cam) {
    CameraFrame f;
    f.forward = (cam.look_at - cam.position).normalized();
    f.right = f.forward.cross(cam.up).normalized();
    f.up = f.right.cross(f.forward);
    f.focal_px = 0.5 * cam.image_height / std::tan(0.5 * cam.vertical_fov * kDegToRad);
    return f;
}

namespace {

Vec3 to_view(const CameraFrame& f, const CameraModel& cam, const Vec3& p) {
    const Vec3 d = p - cam.position;
    return {f.right.dot(d), f.up.dot(d), f.forward.dot(d)};
}

ImagePoint view_to_image(const CameraFrame& f, const CameraModel& cam, const Vec3& v) {
    return {0.5 * cam.image_width + f.focal_px * v.x / v.z, 0.5 * cam.image_height - f.focal_px * v.y / v.z, v.z};
}

} // namespace

ImagePoint project_point(const CameraModel& cam, const Vec3& p) {
    const auto f = camera_frame(cam);
    const Vec3 v = to_view(f, cam, p);
    if (!(v.z >= cam.near_clip)) {
        throw BehindCameraError("point is at or behind the camera plane (view depth " + std::to_string(v.z) + ")");
    }
    return view_to_image(f, cam, v);
}

Vec3 unproject(const CameraModel& cam, const ImagePoint& q) {
    const auto f = camera_frame(cam);
    const double x = (q.u - 0.5 * cam.image_width) * q.depth / f.focal_px;
    const double y = (0.5 * cam.image_height - q.v) * q.depth / f.focal_px;
    return cam.position + f.right * x + f.up * y + f.forward * q.depth;
}

std::array<Vec3, 8> object_corners(const ObjectInstance& o) {
    const double c = std::cos(o.rotation * kDegToRad);
    const double s = std::sin(o.rotation * kDegToRad);
    const double h = o.half_extent;
    std::array<Vec3, 8> out;
    int k = 0;
    for (int sz : {-1, 1}) {
        for (int sy : {-1, 1}) {
            for (int sx : {-1, 1}) {
                const double lx = sx * h;
                const double ly = sy * h;
                out[k++] = o.location + Vec3{c * lx - s * ly, s * lx + c * ly, sz * h};
            }
        }
    }
    return out;
}

BBox2D project_object_bbox(const CameraModel& cam, const ObjectInstance& o) {
    const auto f = camera_frame(cam);
    const auto corners = object_corners(o);
    std::array<Vec3, 8> view;
    for (std::size_t i = 0; i < corners.size(); ++i) view[i] = to_view(f, cam, corners[i]);

    double u0 = std::numeric_limits<double>::infinity(), v0 = u0;
    double u1 = -u0, v1 = -u0;
    int visible = 0;
    const auto include = [&](const Vec3& v) {
        const auto q = view_to_image(f, cam, v);
        u0 = std::min(u0, q.u);
        u1 = std::max(u1, q.u);
        v0 = std::min(v0, q.v);
        v1 = std::max(v1, q.v);
    };
    for (const auto& v : view) {
        if (v.z >= cam.near_clip) {
            include(v);
            ++visible;
        }
    }
    if (visible == 0) throw BehindCameraError("object box lies entirely behind the camera");
    if (visible < 8) {
        // Cube edges join corners that differ in exactly one index bit; where an
        // edge crosses the near plane the crossing point bounds the visible part.
        for (int a = 0; a < 8; ++a) {
            for (int bit = 1; bit < 8; bit <<= 1) {
                const int b = a | bit;
                if (b == a) continue;
                const Vec3& pa = view[a];
                const Vec3& pb = view[b];
                if ((pa.z >= cam.near_clip) == (pb.z >= cam.near_clip)) continue;
                const double t = (cam.near_clip - pa.z) / (pb.z - pa.z);
                Vec3 cut = pa + (pb - pa) * t;
                cut.z = cam.near_clip;
                include(cut);
            }
        }
    }

    BBox2D box;
    box.x0 = std::clamp(u0, 0.0, static_cast<double>(cam.image_width));
    box.x1 = std::clamp(u1, 0.0, static_cast<double>(cam.image_width));
    box.y0 = std::clamp(v0, 0.0, static_cast<double>(cam.image_height));
    box.y1 = std::clamp(v1, 0.0, static_cast<double>(cam.image_height));
    box.depth = to_view(f, cam, o.location).z;
    return box;
}

std::array<float, 3> label_embedding(int label_index) {
    if (label_index < 0 || label_index >= 64) {
        throw ValidationError("label index " + std::to_string(label_index) + " outside [0, 64)");
    }
    const int d2 = label_index / 16;
    const int d1 = (label_index / 4) % 4;
    const int d0 = label_index % 4;
    return {(d2 + 0.5f) / 4.0f, (d1 + 0.5f) / 4.0f, (d0 + 0.5f) / 4.0f};
}

int rotation_bin(double theta_degrees) {
    double r = std::fmod(theta_degrees, 90.0);
    if (r < 0.0) r += 90.0;
    return std::clamp(static_cast<int>(std::floor(r / 15.0)), 0, 5);
}

std::array<float, 6> rotation_onehot(double theta_degrees) {
    std::array<float, 6> v{};
    v[rotation_bin(theta_degrees)] = 1.0f;
    return v;
}

InstanceMap rasterize_instance_map(const ParseGraph& g, const GrammarSpec& spec) {
    const auto& cam = spec.camera;
    InstanceMap map;
    map.width = cam.image_width;
    map.height = cam.image_height;
    map.data.assign(static_cast<std::size_t>(map.width) * map.height * kInstanceChannels, 0.0f);

    struct Painted {
        BBox2D box;
        const ObjectInstance* object;
    };
    std::vector<Painted> order;
    order.reserve(g.objects.size());
    for (std::size_t i = 0; i < g.objects.size(); ++i) {
        try {
            order.push_back({project_object_bbox(cam, g.objects[i]), &g.objects[i]});
        } catch (const BehindCameraError& e) {
            throw BehindCameraError("object " + std::to_string(i) + ": " + e.what());
        }
        if (order.back().box.depth < cam.near_clip) {
            throw BehindCameraError("object " + std::to_string(i) + ": center is behind the camera");
        }
    }
    // Far to near; the remaining keys make the order independent of input order.
    std::sort(order.begin(), order.end(), [](const Painted& a, const Painted& b) {
        const auto key = [](const Painted& p) {
            const auto& o = *p.object;
            return std::tuple(-p.box.depth, o.label_index, o.location.x, o.location.y, o.location.z, o.rotation,
                              o.half_extent);
        };
        return key(a) < key(b);
    });

    for (const auto& p : order) {
        const auto emb = label_embedding(p.object->label_index);
        const auto rot = rotation_onehot(p.object->rotation);
        std::array<float, kInstanceChannels> px{};
        std::copy(emb.begin(), emb.end(), px.begin());
        std::copy(rot.begin(), rot.end(), px.begin() + 3);
        // Pixels whose centers fall inside [x0, x1) x [y0, y1).
        const int c0 = static_cast<int>(std::ceil(p.box.x0 - 0.5));
        const int c1 = static_cast<int>(std::ceil(p.box.x1 - 0.5));
        const int r0 = static_cast<int>(std::ceil(p.box.y0 - 0.5));
        const int r1 = static_cast<int>(std::ceil(p.box.y1 - 0.5));
        for (int row = std::max(r0, 0); row < std::min(r1, map.height); ++row) {
            for (int col = std::max(c0, 0); col < std::min(c1, map.width); ++col) {
                std::copy(px.begin(), px.end(),
                          map.data.begin() + (static_cast<std::ptrdiff_t>(row) * map.width + col) * kInstanceChannels);
            }
        }
    }
    return map;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
    return v;
}

} // namespace

std::vector<std::uint8_t> encode_instance_map(const InstanceMap& map) {
    std::vector<std::uint8_t> out(std::begin(kSimapMagic), std::end(kSimapMagic));
    out.reserve(out.size() + 12 + map.data.size() * 4);
    put_u32(out, static_cast<std::uint32_t>(map.width));
    put_u32(out, static_cast<std::uint32_t>(map.height));
    put_u32(out, static_cast<std::uint32_t>(map.channels));
    for (float v : map.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

InstanceMap decode_instance_map(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = sizeof(kSimapMagic) + 12;
    if (bytes.size() < sizeof(kSimapMagic)) throw FormatError("truncated SIMAP1 magic", bytes.size());
    for (std::size_t i = 0; i < sizeof(kSimapMagic); ++i) {
        if (bytes[i] != static_cast<std::uint8_t>(kSimapMagic[i])) throw FormatError("bad SIMAP1 magic", i);
    }
    if (bytes.size() < header) throw FormatError("truncated SIMAP1 header", bytes.size());
    InstanceMap map;
    map.width = static_cast<int>(get_u32(bytes, 6));
    map.height = static_cast<int>(get_u32(bytes, 10));
    map.channels = static_cast<int>(get_u32(bytes, 14));
    const std::size_t values = static_cast<std::size_t>(map.width) * map.height * map.channels;
    if (bytes.size() != header + values * 4) {
        throw FormatError("SIMAP1 payload should be " + std::to_string(header + values * 4) + " bytes",
                          std::min(bytes.size(), header + values * 4));
    }
    map.data.resize(values);
    for (std::size_t i = 0; i < values; ++i) map.data[i] = std::bit_cast<float>(get_u32(bytes, header + 4 * i));
    return map;
}

std::vector<std::uint8_t> instance_map_ppm(const InstanceMap& map) {
    const std::string head = "P6\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.reserve(out.size() + static_cast<std::size_t>(map.width) * map.height * 3);
    for (int row = 0; row < map.height; ++row) {
        for (int col = 0; col < map.width; ++col) {
            for (int ch = 0; ch < 3; ++ch) {
                const float v = std::clamp(map.at(row, col, ch), 0.0f, 1.0f);
                out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
            }
        }
    }
    return out;
}

} // namespace saog
