#pragma once

// Independent reference computations used to check the library. None of these
// call the code path they check: they re-derive each quantity from its
// definition, usually by brute force.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "saog/model.hpp"
#include "saog/projection.hpp"

namespace saog::oracle {

/// Hinge on violation, recomputed from raw coordinates.
double relation_hinge(const Vec3& subject, const Vec3& object, const Vec3& direction);

struct TermSums {
    double relation = 0.0;
    double camera = 0.0;
    double height = 0.0;
    double total = 0.0;
};

/// Per-item recomputation of the energy terms. Camera masses are looked up by
/// explicit bin arithmetic on the histogram arrays.
TermSums energy_terms(const ParseGraph& g, const GrammarSpec& spec);

/// Exhaustive search over every subset of candidate relations (Gray-code order,
/// one toggle per step). Score: sum over included edges of log rho - lambda_d*E_d
/// plus sum over excluded edges of log(1 - rho). Returns the best subset in
/// canonical order.
std::vector<Relation> brute_force_map(std::span<const ObjectInstance> objects, const GrammarSpec& spec);

/// Histogram masses computed point by point: each output bin sums the
/// truncated Gaussian kernel weight of every input location directly.
std::vector<double> dense_histogram(std::span<const std::array<double, 2>> points, double x_min, double x_max,
                                    double y_min, double y_max, int bins, double sigma, double epsilon);

/// Pixel coordinates via explicit 4x4 look-at and perspective matrices in
/// homogeneous coordinates (OpenGL conventions), then the viewport transform.
std::array<double, 2> project_with_matrices(const CameraModel& cam, const Vec3& p);

/// 2-D hull of `samples` points drawn uniformly over the faces of the object's
/// rotated cube, projected one by one and clipped to the image.
BBox2D dense_bbox(const CameraModel& cam, const ObjectInstance& o, int samples, std::uint64_t seed);

/// Total-variation distance between two discrete distributions given as
/// (key, probability) maps.
template <typename Map>
double total_variation(const Map& a, const Map& b) {
    double tv = 0.0;
    for (const auto& [k, p] : a) {
        const auto it = b.find(k);
        tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, p] : b) {
        if (a.find(k) == a.end()) tv += std::abs(p);
    }
    return 0.5 * tv;
}

} // namespace saog::oracle
