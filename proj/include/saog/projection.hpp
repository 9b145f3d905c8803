#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "saog/model.hpp"

namespace saog {

struct ImagePoint {
    double u = 0.0; // pixels, left to right
    double v = 0.0; // pixels, top to bottom
    double depth = 0.0;
};

struct BBox2D {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double depth = 0.0;

    bool empty() const { return x1 <= x0 || y1 <= y0; }
};

/// Orthonormal look-at frame: right, true up, forward (view axis).
struct CameraFrame {
    Vec3 right, up, forward;
    double focal_px = 0.0;
};

CameraFrame camera_frame(const CameraModel& cam);

/// Throws ValidationError for a degenerate camera.
void validate_camera(const CameraModel& cam);

/// Look-at view transform followed by perspective projection; origin top-left.
/// Throws BehindCameraError when the view depth is below the near clip.
ImagePoint project_point(const CameraModel& cam, const Vec3& p);

/// Inverse of project_point at a known depth.
Vec3 unproject(const CameraModel& cam, const ImagePoint& q);

/// The eight corners of an object's cube, rotated about the vertical axis.
std::array<Vec3, 8> object_corners(const ObjectInstance& o);

/// 2-D hull of the projected cube, clipped to the near plane and the image.
BBox2D project_object_bbox(const CameraModel& cam, const ObjectInstance& o);

/// Three-channel base-4 code of a label index in [0, 64).
std::array<float, 3> label_embedding(int label_index);

/// Rotation bin in [0, 6) of theta reduced modulo 90 degrees.
int rotation_bin(double theta_degrees);
std::array<float, 6> rotation_onehot(double theta_degrees);

inline constexpr int kInstanceChannels = 9;

struct InstanceMap {
    int width = 0;
    int height = 0;
    int channels = kInstanceChannels;
    std::vector<float> data; // row, column, channel innermost
    std::string source_id;

    float at(int row, int col, int ch) const {
        return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    bool operator==(const InstanceMap& o) const {
        return width == o.width && height == o.height && channels == o.channels && data == o.data;
    }
};

/// Painter's algorithm: objects sorted far to near fill their boxes with
/// [label embedding | rotation one-hot]; background stays zero.
InstanceMap rasterize_instance_map(const ParseGraph& g, const GrammarSpec& spec);

/// Map sized for `cam` but rendered at another resolution is not supported;
/// this records the working size a downstream resampler should target.
struct ResampleHint {
    int source_width = 480;
    int source_height = 320;
    int working_width = 256;
    int working_height = 256;
};

/// SIMAP1 binary: magic, width/height/channels as u32 LE, then f32 LE values.
std::vector<std::uint8_t> encode_instance_map(const InstanceMap& map);
InstanceMap decode_instance_map(std::span<const std::uint8_t> bytes);

/// Binary PPM (P6) preview of the label-embedding channels.
std::vector<std::uint8_t> instance_map_ppm(const InstanceMap& map);

} // namespace saog
