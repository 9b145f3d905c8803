#pragma once

#include <span>
#include <vector>

#include "saog/model.hpp"

namespace saog {

/// Hinge on violation of `rel`: max(-n . (r_subject - r_object), 0).
/// With `paper_literal_sign` the printed form max(n . r, 0) is used instead.
double relation_energy(const Relation& rel, std::span<const ObjectInstance> objects,
                       std::span<const RelationType> types, bool paper_literal_sign = false);

/// -log of the histogram mass at the object's ground-plane position.
double camera_energy(const ObjectInstance& o, const LocationHistogram& hist);

/// |bottom height| with the ground at z = 0.
double height_energy(const ObjectInstance& o);

/// Ground-plane overlap hinge: max(h_a + h_b - |r_a - r_b|_xy, 0).
double overlap_energy(const ObjectInstance& a, const ObjectInstance& b);

EnergyBreakdown total_energy(const ParseGraph& g, const GrammarSpec& spec);

/// Recomputes `total` from the per-term sums.
double weighted_total(const EnergyBreakdown& e, const Weights& w);

struct Bounds {
    double x_min, x_max, y_min, y_max;
};

/// Data range padded by `pad_fraction` of its extent on each side.
Bounds bounds_from_locations(std::span<const std::array<double, 2>> locations, double pad_fraction = 0.1);

LocationHistogram fit_location_histogram(std::span<const std::array<double, 2>> locations, const Bounds& bounds,
                                         int bins = 32, double sigma = 1.0, double epsilon = 1e-6);

LocationHistogram uniform_histogram(const Bounds& bounds, int bins = 32, double epsilon = 1e-6);

/// Throws ValidationError when mass, bounds or floor break the histogram invariants.
void validate_histogram(const LocationHistogram& hist);

} // namespace saog
