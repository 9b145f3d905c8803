#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace saog::oracle {

double relation_hinge(const Vec3& subject, const Vec3& object, const Vec3& direction) {
    const double along = direction.x * (subject.x - object.x) + direction.y * (subject.y - object.y) +
                         direction.z * (subject.z - object.z);
    return along >= 0.0 ? 0.0 : -along;
}

TermSums energy_terms(const ParseGraph& g, const GrammarSpec& spec) {
    TermSums t;
    for (const auto& r : g.relations) {
        t.relation += relation_hinge(g.objects[r.subject].location, g.objects[r.object].location,
                                     spec.relation_types[r.relation_type].direction);
    }
    const auto& h = spec.location_hist;
    for (const auto& o : g.objects) {
        const double x = o.location.x, y = o.location.y;
        double mass = h.epsilon;
        if (x >= h.x_min && x <= h.x_max && y >= h.y_min && y <= h.y_max) {
            int ix = static_cast<int>((x - h.x_min) / ((h.x_max - h.x_min) / h.bins));
            int iy = static_cast<int>((y - h.y_min) / ((h.y_max - h.y_min) / h.bins));
            ix = std::min(ix, h.bins - 1);
            iy = std::min(iy, h.bins - 1);
            mass = h.mass[static_cast<std::size_t>(iy * h.bins + ix)];
        }
        t.camera += -std::log(mass);
        const double bottom = o.location.z - o.half_extent;
        t.height += bottom < 0 ? -bottom : bottom;
    }
    t.total = spec.weights.relation * t.relation + spec.weights.camera * t.camera + spec.weights.height * t.height;
    return t;
}

std::vector<Relation> brute_force_map(std::span<const ObjectInstance> objects, const GrammarSpec& spec) {
    std::vector<Relation> cands;
    std::vector<double> on, off;
    const int n = static_cast<int>(objects.size());
    for (int t = 0; t < static_cast<int>(spec.relation_types.size()); ++t) {
        const double rho = spec.relation_types[t].prior;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                cands.push_back({t, i, j});
                const double e =
                    relation_hinge(objects[i].location, objects[j].location, spec.relation_types[t].direction);
                on.push_back(std::log(rho) - spec.weights.relation * e);
                off.push_back(std::log(1.0 - rho));
            }
        }
    }
    const std::size_t m = cands.size();
    const auto exact_score = [&](std::uint64_t mask) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += (mask >> k & 1U) ? on[k] : off[k];
        return s;
    };

    std::uint64_t mask = 0;
    double running = exact_score(0);
    std::uint64_t best_mask = 0;
    double best = running;
    const std::uint64_t total = std::uint64_t{1} << m;
    for (std::uint64_t step = 1; step < total; ++step) {
        const int bit = std::countr_zero(step); // Gray code: flip the lowest set bit of the counter
        mask ^= std::uint64_t{1} << bit;
        running += (mask >> bit & 1U) ? on[bit] - off[bit] : off[bit] - on[bit];
        if (running > best - 1e-7) {
            const double exact = exact_score(mask);
            if (exact > best) {
                best = exact;
                best_mask = mask;
            }
            running = exact;
        }
    }
    std::vector<Relation> out;
    for (std::size_t k = 0; k < m; ++k) {
        if (best_mask >> k & 1U) out.push_back(cands[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> dense_histogram(std::span<const std::array<double, 2>> points, double x_min, double x_max,
                                    double y_min, double y_max, int bins, double sigma, double epsilon) {
    const auto weight = [sigma](int dx, int dy) {
        const double r2 = static_cast<double>(dx * dx + dy * dy);
        if (sigma == 0.0) return (dx == 0 && dy == 0) ? 1.0 : 0.0;
        if (r2 > 9.0 * sigma * sigma) return 0.0;
        return std::exp(-r2 / (2.0 * sigma * sigma));
    };
    // Kernel normalizer over an unbounded grid.
    const int reach = static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    double z = 0.0;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) z += weight(dx, dy);
    }

    std::vector<double> raw(static_cast<std::size_t>(bins) * bins, 0.0);
    for (const auto& p : points) {
        if (p[0] < x_min || p[0] > x_max || p[1] < y_min || p[1] > y_max) continue;
        const int px = std::min(bins - 1, static_cast<int>(std::floor((p[0] - x_min) * bins / (x_max - x_min))));
        const int py = std::min(bins - 1, static_cast<int>(std::floor((p[1] - y_min) * bins / (y_max - y_min))));
        for (int ty = 0; ty < bins; ++ty) {
            for (int tx = 0; tx < bins; ++tx) {
                raw[static_cast<std::size_t>(ty) * bins + tx] += weight(tx - px, ty - py) / z;
            }
        }
    }
    double sum = 0.0;
    for (double r : raw) sum += r;
    std::vector<double> mass(raw.size());
    const double share = 1.0 - epsilon * static_cast<double>(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) mass[i] = epsilon + share * raw[i] / sum;
    return mass;
}

std::array<double, 2> project_with_matrices(const CameraModel& cam, const Vec3& p) {
    using M4 = std::array<std::array<double, 4>, 4>;
    const Vec3 f = (cam.look_at - cam.position).normalized();
    const Vec3 s = f.cross(cam.up).normalized();
    const Vec3 u = s.cross(f);
    const M4 view{{{s.x, s.y, s.z, -s.dot(cam.position)},
                   {u.x, u.y, u.z, -u.dot(cam.position)},
                   {-f.x, -f.y, -f.z, f.dot(cam.position)},
                   {0, 0, 0, 1}}};
    const double near = 0.1, far = 100.0;
    const double fy = 1.0 / std::tan(cam.vertical_fov * std::numbers::pi / 360.0);
    const double aspect = static_cast<double>(cam.image_width) / cam.image_height;
    const M4 proj{{{fy / aspect, 0, 0, 0},
                   {0, fy, 0, 0},
                   {0, 0, (far + near) / (near - far), 2 * far * near / (near - far)},
                   {0, 0, -1, 0}}};
    const std::array<double, 4> ph{p.x, p.y, p.z, 1.0};
    std::array<double, 4> eye{}, clip{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) eye[r] += view[r][c] * ph[c];
    }
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) clip[r] += proj[r][c] * eye[c];
    }
    const double nx = clip[0] / clip[3];
    const double ny = clip[1] / clip[3];
    return {(nx + 1.0) * 0.5 * cam.image_width, (1.0 - ny) * 0.5 * cam.image_height};
}

BBox2D dense_bbox(const CameraModel& cam, const ObjectInstance& o, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> face(0, 5);
    std::uniform_real_distribution<double> coord(-o.half_extent, o.half_extent);
    const double a = o.rotation * std::numbers::pi / 180.0;
    const Vec3 fwd = (cam.look_at - cam.position).normalized();
    BBox2D b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
    // Corners first so the hull is exact; the dense samples add nothing beyond
    // them for a convex solid but exercise the surface.
    std::vector<Vec3> local;
    for (int c = 0; c < 8; ++c) {
        local.push_back({(c & 1 ? 1 : -1) * o.half_extent, (c & 2 ? 1 : -1) * o.half_extent,
                         (c & 4 ? 1 : -1) * o.half_extent});
    }
    for (int k = 0; k < samples; ++k) {
        const int fc = face(rng);
        const double s = fc % 2 == 0 ? -o.half_extent : o.half_extent;
        const double c1 = coord(rng), c2 = coord(rng);
        if (fc < 2) local.push_back({s, c1, c2});
        else if (fc < 4) local.push_back({c1, s, c2});
        else local.push_back({c1, c2, s});
    }
    for (const auto& l : local) {
        const Vec3 w{o.location.x + std::cos(a) * l.x - std::sin(a) * l.y,
                     o.location.y + std::sin(a) * l.x + std::cos(a) * l.y, o.location.z + l.z};
        if ((w - cam.position).dot(fwd) < cam.near_clip) continue;
        const auto px = project_with_matrices(cam, w);
        b.x0 = std::min(b.x0, px[0]);
        b.x1 = std::max(b.x1, px[0]);
        b.y0 = std::min(b.y0, px[1]);
        b.y1 = std::max(b.y1, px[1]);
    }
    b.x0 = std::clamp(b.x0, 0.0, static_cast<double>(cam.image_width));
    b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(cam.image_width));
    b.y0 = std::clamp(b.y0, 0.0, static_cast<double>(cam.image_height));
    b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(cam.image_height));
    b.depth = (o.location - cam.position).dot(fwd);
    return b;
}

} // namespace saog::oracle
