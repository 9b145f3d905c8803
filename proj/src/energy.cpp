#include "saog/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saog/errors.hpp"

namespace saog {

double relation_energy(const Relation& rel, std::span<const ObjectInstance> objects,
                       std::span<const RelationType> types, bool paper_literal_sign) {
    if (rel.relation_type < 0 || static_cast<std::size_t>(rel.relation_type) >= types.size()) {
        throw ValidationError("relation type index " + std::to_string(rel.relation_type) + " out of range");
    }
    const auto n = static_cast<int>(objects.size());
    if (rel.subject < 0 || rel.subject >= n || rel.object < 0 || rel.object >= n) {
        throw ValidationError("relation endpoint out of range");
    }
    const Vec3 offset = objects[rel.subject].location - objects[rel.object].location;
    const double along = types[rel.relation_type].direction.dot(offset);
    return paper_literal_sign ? std::max(along, 0.0) : std::max(-along, 0.0);
}

double camera_energy(const ObjectInstance& o, const LocationHistogram& hist) {
    const auto bin = hist.bin_of(o.location.x, o.location.y);
    if (!bin) return -std::log(hist.epsilon);
    return -std::log(hist.at((*bin)[0], (*bin)[1]));
}

double height_energy(const ObjectInstance& o) { return std::abs(o.bottom_height()); }

double overlap_energy(const ObjectInstance& a, const ObjectInstance& b) {
    const double dx = a.location.x - b.location.x;
    const double dy = a.location.y - b.location.y;
    return std::max(a.half_extent + b.half_extent - std::sqrt(dx * dx + dy * dy), 0.0);
}

double weighted_total(const EnergyBreakdown& e, const Weights& w) {
    return w.relation * e.sum_relation + w.camera * e.sum_camera + w.height * e.sum_height +
           w.overlap * e.sum_overlap;
}

EnergyBreakdown total_energy(const ParseGraph& g, const GrammarSpec& spec) {
    EnergyBreakdown e;
    for (const auto& rel : g.relations) {
        e.sum_relation += relation_energy(rel, g.objects, spec.relation_types, spec.weights.paper_literal_sign);
    }
    for (const auto& o : g.objects) {
        e.sum_camera += camera_energy(o, spec.location_hist);
        e.sum_height += height_energy(o);
    }
    if (spec.weights.overlap != 0.0) {
        for (std::size_t i = 0; i < g.objects.size(); ++i) {
            for (std::size_t j = i + 1; j < g.objects.size(); ++j) {
                e.sum_overlap += overlap_energy(g.objects[i], g.objects[j]);
            }
        }
    }
    e.total = weighted_total(e, spec.weights);
    return e;
}

Bounds bounds_from_locations(std::span<const std::array<double, 2>> locations, double pad_fraction) {
    if (locations.empty()) throw ValidationError("cannot fit bounds to an empty location list");
    Bounds b{locations[0][0], locations[0][0], locations[0][1], locations[0][1]};
    for (const auto& p : locations) {
        b.x_min = std::min(b.x_min, p[0]);
        b.x_max = std::max(b.x_max, p[0]);
        b.y_min = std::min(b.y_min, p[1]);
        b.y_max = std::max(b.y_max, p[1]);
    }
    const auto pad = [pad_fraction](double& lo, double& hi) {
        const double extent = hi - lo;
        const double d = extent > 0.0 ? extent * pad_fraction : 1.0;
        lo -= d;
        hi += d;
    };
    pad(b.x_min, b.x_max);
    pad(b.y_min, b.y_max);
    return b;
}

namespace {

void check_fit_args(const Bounds& bounds, int bins, double sigma, double epsilon) {
    if (bins < 2) throw ValidationError("histogram needs at least 2 bins per axis");
    if (!(sigma >= 0.0)) throw ValidationError("smoothing sigma must be >= 0");
    if (!(epsilon > 0.0) || epsilon * bins * bins >= 1.0) {
        throw ValidationError("histogram floor must satisfy 0 < epsilon < 1/bins^2");
    }
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) {
        throw ValidationError("histogram bounds are empty");
    }
}

LocationHistogram empty_histogram(const Bounds& bounds, int bins, double sigma, double epsilon) {
    LocationHistogram h;
    h.x_min = bounds.x_min;
    h.x_max = bounds.x_max;
    h.y_min = bounds.y_min;
    h.y_max = bounds.y_max;
    h.bins = bins;
    h.sigma = sigma;
    h.epsilon = epsilon;
    h.mass.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    return h;
}

} // namespace

LocationHistogram uniform_histogram(const Bounds& bounds, int bins, double epsilon) {
    check_fit_args(bounds, bins, 0.0, epsilon);
    auto h = empty_histogram(bounds, bins, 0.0, epsilon);
    std::fill(h.mass.begin(), h.mass.end(), 1.0 / (static_cast<double>(bins) * bins));
    return h;
}

LocationHistogram fit_location_histogram(std::span<const std::array<double, 2>> locations, const Bounds& bounds,
                                         int bins, double sigma, double epsilon) {
    if (locations.empty()) throw ValidationError("cannot fit a location histogram to an empty location list");
    check_fit_args(bounds, bins, sigma, epsilon);
    auto h = empty_histogram(bounds, bins, sigma, epsilon);

    std::vector<double> counts(h.mass.size(), 0.0);
    std::size_t inside = 0;
    for (const auto& p : locations) {
        if (auto bin = h.bin_of(p[0], p[1])) {
            counts[static_cast<std::size_t>((*bin)[1]) * bins + (*bin)[0]] += 1.0;
            ++inside;
        }
    }
    if (inside == 0) throw ValidationError("no location falls inside the histogram bounds");

    // Isotropic Gaussian kernel truncated to a disc of radius 3 sigma.
    const int radius = sigma > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
    const int width = 2 * radius + 1;
    std::vector<double> kernel(static_cast<std::size_t>(width) * width, 0.0);
    double kernel_sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double r2 = dx * dx + dy * dy;
            if (sigma > 0.0 && r2 > 9.0 * sigma * sigma) continue;
            const double w = sigma > 0.0 ? std::exp(-r2 / (2.0 * sigma * sigma)) : 1.0;
            kernel[static_cast<std::size_t>(dy + radius) * width + (dx + radius)] = w;
            kernel_sum += w;
        }
    }
    for (auto& w : kernel) w /= kernel_sum;

    std::vector<double> smoothed(h.mass.size(), 0.0);
    for (int sy = 0; sy < bins; ++sy) {
        for (int sx = 0; sx < bins; ++sx) {
            const double c = counts[static_cast<std::size_t>(sy) * bins + sx];
            if (c == 0.0) continue;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int ty = sy + dy;
                if (ty < 0 || ty >= bins) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int tx = sx + dx;
                    if (tx < 0 || tx >= bins) continue;
                    smoothed[static_cast<std::size_t>(ty) * bins + tx] +=
                        c * kernel[static_cast<std::size_t>(dy + radius) * width + (dx + radius)];
                }
            }
        }
    }
    double total = 0.0;
    for (double s : smoothed) total += s;

    // Floor every bin at epsilon and share the remaining mass proportionally.
    const double free_mass = 1.0 - epsilon * static_cast<double>(h.mass.size());
    for (std::size_t i = 0; i < h.mass.size(); ++i) {
        h.mass[i] = epsilon + free_mass * smoothed[i] / total;
    }
    return h;
}

void validate_histogram(const LocationHistogram& hist) {
    std::ostringstream problems;
    if (hist.bins < 2) problems << "bins < 2; ";
    if (!(hist.x_max > hist.x_min) || !(hist.y_max > hist.y_min)) problems << "empty bounds; ";
    if (!(hist.epsilon > 0.0)) problems << "epsilon must be > 0; ";
    if (hist.mass.size() != static_cast<std::size_t>(hist.bins) * hist.bins) {
        problems << "mass array has " << hist.mass.size() << " entries, expected bins^2; ";
    } else {
        double sum = 0.0;
        for (double m : hist.mass) {
            sum += m;
            if (!(m >= hist.epsilon * (1.0 - 1e-9))) {
                problems << "bin mass below floor; ";
                break;
            }
        }
        if (std::abs(sum - 1.0) > 1e-6) problems << "masses sum to " << sum << "; ";
    }
    const auto msg = problems.str();
    if (!msg.empty()) throw ValidationError("invalid location histogram: " + msg);
}

} // namespace saog
