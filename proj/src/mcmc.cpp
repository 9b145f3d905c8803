#include "saog/mcmc.hpp"

#include <cmath>
#include <ostream>

#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"

namespace saog {

namespace {

double wrap_degrees(double theta) {
    double t = std::fmod(theta, 360.0);
    if (t < 0.0) t += 360.0;
    if (t >= 360.0) t = 0.0;
    return t;
}

double gaussian(Rng& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

void require_valid(const GrammarSpec& spec, const ParseGraph& g) {
    const auto diags = validate(spec, g);
    if (!diags.empty()) throw ValidationError("invalid parse graph: " + diags.front().message);
}

} // namespace

LocationChain::LocationChain(ParseGraph g, const GrammarSpec& spec, const ChainConfig& cfg, std::uint64_t seed)
    : spec_(&spec), cfg_(cfg), graph_(std::move(g)), rng_(seed), incident_(graph_.objects.size()) {
    if (cfg.proposal_sigma_xy < 0.0 || cfg.proposal_sigma_z < 0.0 || cfg.proposal_sigma_theta < 0.0) {
        throw ValidationError("proposal sigmas must be >= 0");
    }
    for (int k = 0; k < static_cast<int>(graph_.relations.size()); ++k) {
        incident_[graph_.relations[k].subject].push_back(k);
        incident_[graph_.relations[k].object].push_back(k);
    }
    resync_energy();
}

void LocationChain::resync_energy() { energy_ = total_energy(graph_, *spec_).total; }

double LocationChain::local_energy(int object) const {
    const auto& spec = *spec_;
    const auto& w = spec.weights;
    const auto& o = graph_.objects[object];
    double e = w.camera * camera_energy(o, spec.location_hist) + w.height * height_energy(o);
    if (w.relation != 0.0) {
        double rel = 0.0;
        for (int k : incident_[object]) {
            rel += relation_energy(graph_.relations[k], graph_.objects, spec.relation_types, w.paper_literal_sign);
        }
        e += w.relation * rel;
    }
    if (w.overlap != 0.0) {
        double ov = 0.0;
        for (int j = 0; j < static_cast<int>(graph_.objects.size()); ++j) {
            if (j != object) ov += overlap_energy(o, graph_.objects[j]);
        }
        e += w.overlap * ov;
    }
    return e;
}

long LocationChain::advance(long steps, double temperature, const MhObserver& observer) {
    const int n = static_cast<int>(graph_.objects.size());
    if (n == 0 || steps <= 0) return 0;
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long accepted = 0;
    for (long s = 0; s < steps; ++s) {
        const int k = pick(rng_);
        auto& o = graph_.objects[k];
        const ObjectInstance before = o;
        const double old_local = local_energy(k);

        o.location.x += gaussian(rng_, cfg_.proposal_sigma_xy);
        o.location.y += gaussian(rng_, cfg_.proposal_sigma_xy);
        o.location.z += gaussian(rng_, cfg_.proposal_sigma_z);
        o.rotation = wrap_degrees(o.rotation + gaussian(rng_, cfg_.proposal_sigma_theta));

        const double delta = local_energy(k) - old_local;
        const double u = unit(rng_);
        const bool accept = delta <= 0.0 || u < std::exp(-delta / temperature);
        if (accept) {
            energy_ += delta;
            ++accepted;
        } else {
            o = before;
        }
        if (observer) {
            observer(MhStep{step_, k, accept, temperature, delta, energy_, &graph_});
        }
        ++step_;
    }
    return accepted;
}

MhResult sample_locations_mh(const ParseGraph& g, const GrammarSpec& spec, const ChainConfig& cfg,
                             const MhObserver& observer) {
    require_valid(spec, g);
    if (cfg.steps < 0 || cfg.burn_in < 0) throw ValidationError("chain steps and burn-in must be >= 0");
    if (!(cfg.final_temperature > 0.0)) throw ValidationError("final temperature must be > 0");

    LocationChain chain(g, spec, cfg, cfg.seed);
    const long burn = std::min<long>(cfg.burn_in, cfg.steps);
    long accepted_after_burn = 0;
    const bool annealed = cfg.final_temperature != 1.0;
    for (long s = 0; s < cfg.steps; ++s) {
        const double t =
            annealed ? std::pow(cfg.final_temperature, static_cast<double>(s + 1) / cfg.steps) : 1.0;
        const long a = chain.advance(1, t, observer);
        if (s >= burn) accepted_after_burn += a;
    }
    MhResult result{chain.state(), 0.0};
    if (cfg.steps > burn) result.acceptance_rate = static_cast<double>(accepted_after_burn) / (cfg.steps - burn);
    return result;
}

MhObserver csv_trace_observer(std::ostream& out) {
    return [&out](const MhStep& s) {
        if (s.step == 0) out << "step,energy,accepted\n";
        out << s.step << ',' << s.energy << ',' << (s.accepted ? 1 : 0) << '\n';
    };
}

ChainConfig conditional_chain_defaults() {
    ChainConfig cfg;
    cfg.steps = 20000;
    cfg.burn_in = 1000;
    cfg.final_temperature = 1e-3;
    return cfg;
}

ParseGraph sample_conditional_layout(const ParseGraph& g, const GrammarSpec& spec, const ChainConfig& cfg,
                                     std::uint64_t seed) {
    require_valid(spec, g);
    ParseGraph start = g;
    Rng rng(seed);
    place_objects(spec, start, rng);
    ChainConfig chain = cfg;
    chain.seed = derive_seed(seed, 1);
    return sample_locations_mh(start, spec, chain).graph;
}

double relation_log_odds(const Relation& rel, std::span<const ObjectInstance> objects, const GrammarSpec& spec) {
    const double rho = spec.relation_types.at(rel.relation_type).prior;
    const double e = relation_energy(rel, objects, spec.relation_types, spec.weights.paper_literal_sign);
    return std::log(rho / (1.0 - rho)) - spec.weights.relation * e;
}

namespace {

std::vector<Relation> candidate_relations(std::size_t n_objects, std::size_t n_types) {
    std::vector<Relation> out;
    const int n = static_cast<int>(n_objects);
    for (int t = 0; t < static_cast<int>(n_types); ++t) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j) out.push_back({t, i, j});
            }
        }
    }
    return out;
}

} // namespace

std::vector<Relation> infer_relations_map(std::span<const ObjectInstance> objects, const GrammarSpec& spec) {
    std::vector<Relation> out;
    for (const auto& rel : candidate_relations(objects.size(), spec.relation_types.size())) {
        if (relation_log_odds(rel, objects, spec) > 0.0) out.push_back(rel);
    }
    return out;
}

std::vector<Relation> infer_relations_gibbs(std::span<const ObjectInstance> objects, const GrammarSpec& spec,
                                            int sweeps, const std::vector<double>& temperature_schedule,
                                            std::uint64_t seed, const GibbsObserver& observer) {
    if (sweeps < 1) throw ValidationError("Gibbs inference needs at least one sweep");
    const auto candidates = candidate_relations(objects.size(), spec.relation_types.size());
    std::vector<double> log_odds;
    log_odds.reserve(candidates.size());
    for (const auto& rel : candidates) log_odds.push_back(relation_log_odds(rel, objects, spec));

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<bool> included(candidates.size());
    for (std::size_t v = 0; v < included.size(); ++v) included[v] = unit(rng) < 0.5;

    const auto temperature_at = [&](int sweep) {
        if (!temperature_schedule.empty()) {
            return temperature_schedule[std::min<std::size_t>(sweep, temperature_schedule.size() - 1)];
        }
        if (sweeps == 1) return 0.01;
        return std::pow(0.01, static_cast<double>(sweep) / (sweeps - 1));
    };

    for (int s = 0; s < sweeps; ++s) {
        const double t = temperature_at(s);
        for (std::size_t v = 0; v < candidates.size(); ++v) {
            // Inclusion variables are conditionally independent given the layout,
            // so each full conditional is a Bernoulli on the edge's own log-odds.
            if (t <= kGibbsFreezeTemperature) {
                included[v] = log_odds[v] > 0.0;
            } else {
                const double p = 1.0 / (1.0 + std::exp(-log_odds[v] / t));
                included[v] = unit(rng) < p;
            }
        }
        if (observer) observer(s, t, included);
    }
    std::vector<Relation> out;
    for (std::size_t v = 0; v < candidates.size(); ++v) {
        if (included[v]) out.push_back(candidates[v]);
    }
    return out;
}

std::vector<Relation> relations_from_layout(std::span<const ObjectInstance> objects,
                                            std::span<const RelationType> types, double margin) {
    std::vector<Relation> out;
    for (const auto& rel : candidate_relations(objects.size(), types.size())) {
        const Vec3 offset = objects[rel.subject].location - objects[rel.object].location;
        if (types[rel.relation_type].direction.dot(offset) > margin) out.push_back(rel);
    }
    return out;
}

} // namespace saog
