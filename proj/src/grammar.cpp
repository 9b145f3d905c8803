#include "saog/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/mcmc.hpp"
#include "saog/projection.hpp"

namespace saog {

namespace {

constexpr double kProbTolerance = 1e-9;

template <typename Range, typename Proj>
double sum_of(const Range& r, Proj proj) {
    double s = 0.0;
    for (const auto& x : r) s += proj(x);
    return s;
}

template <typename Range, typename Proj>
std::discrete_distribution<std::size_t> categorical(const Range& r, Proj proj) {
    std::vector<double> w;
    w.reserve(r.size());
    for (const auto& x : r) w.push_back(proj(x));
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

} // namespace

void validate_spec(const GrammarSpec& spec) {
    std::ostringstream problems;
    const auto check_distribution = [&](const char* what, double sum, bool empty) {
        if (empty) {
            problems << what << " is empty; ";
        } else if (std::abs(sum - 1.0) > kProbTolerance) {
            problems << what << " probabilities sum to " << sum << "; ";
        }
    };
    check_distribution("configs", sum_of(spec.configs, [](const auto& c) { return c.probability; }),
                       spec.configs.empty());
    check_distribution("catalog", sum_of(spec.catalog, [](const auto& c) { return c.probability; }),
                       spec.catalog.empty());
    check_distribution("sizes", sum_of(spec.sizes, [](const auto& c) { return c.probability; }),
                       spec.sizes.empty());

    std::set<int> counts;
    for (const auto& c : spec.configs) {
        if (c.objects < 0) problems << "negative object count " << c.objects << "; ";
        if (c.probability < 0.0 || c.probability > 1.0) problems << "config probability out of [0,1]; ";
        if (!counts.insert(c.objects).second) problems << "duplicate config " << c.objects << "; ";
    }
    for (std::size_t i = 0; i < spec.catalog.size(); ++i) {
        const auto& l = spec.catalog[i];
        if (l.label_index != static_cast<int>(i)) {
            problems << "catalog label_index values must be contiguous from 0 (entry " << i << " has "
                     << l.label_index << "); ";
        }
        if (l.probability < 0.0 || l.probability > 1.0) problems << "catalog probability out of [0,1]; ";
    }
    std::set<std::string> size_names;
    for (const auto& s : spec.sizes) {
        if (!(s.half_extent > 0.0)) problems << "size '" << s.name << "' has non-positive half extent; ";
        if (s.probability < 0.0 || s.probability > 1.0) problems << "size probability out of [0,1]; ";
        if (!size_names.insert(s.name).second) problems << "duplicate size '" << s.name << "'; ";
    }
    std::set<std::string> rel_names;
    for (const auto& r : spec.relation_types) {
        if (!(r.prior > 0.0 && r.prior < 1.0)) problems << "relation '" << r.name << "' prior outside (0,1); ";
        if (std::abs(r.direction.norm() - 1.0) > 1e-9) problems << "relation '" << r.name << "' direction not unit; ";
        if (r.direction.z != 0.0) problems << "relation '" << r.name << "' direction has a vertical component; ";
        if (!rel_names.insert(r.name).second) problems << "duplicate relation '" << r.name << "'; ";
    }
    const auto& w = spec.weights;
    if (!(w.relation >= 0.0 && w.camera >= 0.0 && w.height >= 0.0 && w.overlap >= 0.0)) {
        problems << "weights must be nonnegative; ";
    }
    const auto msg = problems.str();
    if (!msg.empty()) throw ValidationError("invalid grammar spec: " + msg);
    validate_histogram(spec.location_hist);
    validate_camera(spec.camera);
}

std::vector<Diagnostic> validate(const GrammarSpec& spec, const ParseGraph& g) {
    std::vector<Diagnostic> out;
    const auto n = static_cast<int>(g.objects.size());
    if (g.n_s != n) {
        out.push_back({"count_mismatch", -1,
                       "n_s is " + std::to_string(g.n_s) + " but the graph has " + std::to_string(n) + " objects"});
    }
    if (!spec.config_index(g.n_s)) {
        out.push_back({"unknown_config", -1, "no scene configuration with " + std::to_string(g.n_s) + " objects"});
    }
    for (int i = 0; i < n; ++i) {
        const auto& o = g.objects[i];
        const auto tag = "object " + std::to_string(i) + ": ";
        if (o.label_index < 0 || o.label_index >= static_cast<int>(spec.catalog.size())) {
            out.push_back({"unknown_label", i, tag + "unknown label " + std::to_string(o.label_index)});
        }
        if (const auto s = spec.size_index(o.size_name); !s) {
            out.push_back({"unknown_size", i, tag + "unknown size '" + o.size_name + "'"});
        } else if (spec.sizes[*s].half_extent != o.half_extent) {
            out.push_back({"size_mismatch", i, tag + "half extent does not match size '" + o.size_name + "'"});
        }
        if (!(o.rotation >= 0.0 && o.rotation < 360.0)) {
            out.push_back({"rotation_range", i, tag + "rotation outside [0, 360)"});
        }
        if (!std::isfinite(o.location.x) || !std::isfinite(o.location.y) || !std::isfinite(o.location.z)) {
            out.push_back({"non_finite", i, tag + "location is not finite"});
        }
    }
    std::set<Relation> seen;
    for (int k = 0; k < static_cast<int>(g.relations.size()); ++k) {
        const auto& r = g.relations[k];
        const auto tag = "relation " + std::to_string(k) + ": ";
        if (r.relation_type < 0 || r.relation_type >= static_cast<int>(spec.relation_types.size())) {
            out.push_back({"unknown_relation_type", k, tag + "unknown relation type " + std::to_string(r.relation_type)});
        }
        if (r.subject < 0 || r.subject >= n || r.object < 0 || r.object >= n) {
            out.push_back({"relation_index", k, tag + "endpoint outside the object list"});
        } else if (r.subject == r.object) {
            out.push_back({"self_relation", k, tag + "subject and object are both " + std::to_string(r.subject)});
        }
        if (!seen.insert(r).second) out.push_back({"duplicate_relation", k, tag + "duplicate relation"});
    }
    return out;
}

void place_objects(const GrammarSpec& spec, ParseGraph& g, Rng& rng) {
    const auto& hist = spec.location_hist;
    std::discrete_distribution<std::size_t> bin_dist(hist.mass.begin(), hist.mass.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    const double bx = (hist.x_max - hist.x_min) / hist.bins;
    const double by = (hist.y_max - hist.y_min) / hist.bins;
    for (auto& o : g.objects) {
        const auto bin = bin_dist(rng);
        const auto ix = static_cast<int>(bin % hist.bins);
        const auto iy = static_cast<int>(bin / hist.bins);
        o.location.x = hist.x_min + (ix + unit(rng)) * bx;
        o.location.y = hist.y_min + (iy + unit(rng)) * by;
        o.location.z = o.half_extent;
        o.rotation = angle(rng);
        if (o.rotation >= 360.0) o.rotation = 0.0;
    }
}

ParseGraph sample_structure(const GrammarSpec& spec, Rng& rng) {
    auto config_dist = categorical(spec.configs, [](const auto& c) { return c.probability; });
    auto label_dist = categorical(spec.catalog, [](const auto& c) { return c.probability; });
    auto size_dist = categorical(spec.sizes, [](const auto& c) { return c.probability; });

    ParseGraph g;
    g.n_s = spec.configs[config_dist(rng)].objects;
    g.objects.resize(static_cast<std::size_t>(g.n_s));
    for (auto& o : g.objects) {
        o.label_index = spec.catalog[label_dist(rng)].label_index;
        const auto& size = spec.sizes[size_dist(rng)];
        o.size_name = size.name;
        o.half_extent = size.half_extent;
    }
    for (int t = 0; t < static_cast<int>(spec.relation_types.size()); ++t) {
        std::bernoulli_distribution present(spec.relation_types[t].prior);
        for (int i = 0; i < g.n_s; ++i) {
            for (int j = 0; j < g.n_s; ++j) {
                if (i != j && present(rng)) g.relations.push_back({t, i, j});
            }
        }
    }
    canonicalize_relations(g.relations);
    place_objects(spec, g, rng);
    return g;
}

ParseGraph sample_parse_graph(const GrammarSpec& spec, const ChainConfig& chain, std::uint64_t seed) {
    validate_spec(spec);
    Rng rng(seed);
    ParseGraph g = sample_structure(spec, rng);
    ChainConfig cfg = chain;
    cfg.seed = derive_seed(seed, 1);
    return sample_locations_mh(g, spec, cfg).graph;
}

LogProb log_prob_unnormalized(const GrammarSpec& spec, const ParseGraph& g) {
    LogProb lp;
    const auto config = spec.config_index(g.n_s);
    if (!config) throw UnknownSymbolError("no scene configuration with " + std::to_string(g.n_s) + " objects");
    lp.branch_logp = std::log(spec.configs[*config].probability);
    for (const auto& o : g.objects) {
        if (o.label_index < 0 || o.label_index >= static_cast<int>(spec.catalog.size())) {
            throw UnknownSymbolError("unknown label " + std::to_string(o.label_index));
        }
        const auto size = spec.size_index(o.size_name);
        if (!size) throw UnknownSymbolError("unknown size '" + o.size_name + "'");
        lp.branch_logp += std::log(spec.catalog[o.label_index].probability);
        lp.branch_logp += std::log(spec.sizes[*size].probability);
    }
    lp.energy = total_energy(g, spec);
    return lp;
}

GrammarSpec default_clevr_spec() {
    GrammarSpec spec;
    for (int n = 3; n <= 10; ++n) spec.configs.push_back({n, 1.0 / 8.0});

    const char* shapes[] = {"cube", "sphere", "cylinder"};
    const char* colors[] = {"gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"};
    const char* materials[] = {"rubber", "metal"};
    for (const char* shape : shapes) {
        for (const char* color : colors) {
            for (const char* material : materials) {
                const int index = static_cast<int>(spec.catalog.size());
                spec.catalog.push_back({index, shape, color, material, 1.0 / 48.0});
            }
        }
    }
    spec.sizes = {{"small", 0.35, 0.5}, {"large", 0.7, 0.5}};

    // Ground-plane projections of CLEVR's camera-relative "front" and "right".
    spec.relation_types = {
        {"front", Vec3{0.754490315914154, -0.6563112735748291, 0.0}.normalized(), 0.45},
        {"right", Vec3{0.6563112735748291, 0.7544902563095093, 0.0}.normalized(), 0.45},
    };
    spec.weights = Weights{2.0, 1.0, 5.0, 0.0, false};
    spec.camera = CameraModel{};
    spec.location_hist = uniform_histogram({-3.3, 3.3, -3.3, 3.3}, 32, 1e-6);
    return spec;
}

} // namespace saog
