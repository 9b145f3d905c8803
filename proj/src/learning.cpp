#include "saog/learning.hpp"

#include <algorithm>
#include <ostream>

#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/mcmc.hpp"
#include "saog/random.hpp"

namespace saog {

BranchProbs fit_branch_probs(std::span<const ParseGraph> dataset, std::size_t relation_type_count) {
    if (dataset.empty()) throw ValidationError("cannot fit branch probabilities to an empty dataset");
    BranchProbs p;
    std::size_t objects = 0;
    double ordered_pairs = 0.0;
    std::vector<double> relation_counts(relation_type_count, 0.0);
    for (const auto& g : dataset) {
        p.configs[g.n_s] += 1.0;
        for (const auto& o : g.objects) {
            p.labels[o.label_index] += 1.0;
            p.sizes[o.size_name] += 1.0;
            ++objects;
        }
        const double n = static_cast<double>(g.objects.size());
        ordered_pairs += n * (n - 1.0);
        for (const auto& r : g.relations) {
            if (r.relation_type < 0 || static_cast<std::size_t>(r.relation_type) >= relation_type_count) {
                throw UnknownSymbolError("relation type " + std::to_string(r.relation_type) + " out of range");
            }
            relation_counts[r.relation_type] += 1.0;
        }
    }
    for (auto& [n, c] : p.configs) c /= static_cast<double>(dataset.size());
    for (auto& [l, c] : p.labels) c /= static_cast<double>(objects);
    for (auto& [s, c] : p.sizes) c /= static_cast<double>(objects);
    p.relation_priors.resize(relation_type_count, 0.5); // no ordered pairs: no evidence either way
    if (ordered_pairs > 0.0) {
        for (std::size_t t = 0; t < relation_type_count; ++t) {
            p.relation_priors[t] =
                std::clamp(relation_counts[t] / ordered_pairs, kRelationPriorClamp, 1.0 - kRelationPriorClamp);
        }
    }
    return p;
}

void apply_branch_probs(GrammarSpec& spec, const BranchProbs& probs) {
    spec.configs.clear();
    for (const auto& [n, p] : probs.configs) spec.configs.push_back({n, p});
    for (auto& l : spec.catalog) l.probability = 0.0;
    for (const auto& [label, p] : probs.labels) {
        if (label < 0 || label >= static_cast<int>(spec.catalog.size())) {
            throw UnknownSymbolError("label " + std::to_string(label) + " is not in the catalog");
        }
        spec.catalog[label].probability = p;
    }
    for (auto& s : spec.sizes) s.probability = 0.0;
    for (const auto& [name, p] : probs.sizes) {
        const auto idx = spec.size_index(name);
        if (!idx) throw UnknownSymbolError("size '" + name + "' is not in the spec");
        spec.sizes[*idx].probability = p;
    }
    for (std::size_t t = 0; t < spec.relation_types.size() && t < probs.relation_priors.size(); ++t) {
        spec.relation_types[t].prior = probs.relation_priors[t];
    }
}

TermMeans mean_term_energies(std::span<const ParseGraph> graphs, const GrammarSpec& spec) {
    TermMeans m;
    if (graphs.empty()) return m;
    for (const auto& g : graphs) {
        const auto e = total_energy(g, spec);
        m.relation += e.sum_relation;
        m.camera += e.sum_camera;
        m.height += e.sum_height;
    }
    const double n = static_cast<double>(graphs.size());
    m.relation /= n;
    m.camera /= n;
    m.height /= n;
    return m;
}

namespace {

TermMeans difference(const TermMeans& model, const TermMeans& data) {
    return {model.relation - data.relation, model.camera - data.camera, model.height - data.height};
}

Weights apply_gradient(const Weights& w, const TermMeans& grad, double alpha) {
    Weights out = w;
    out.relation = std::max(0.0, w.relation + alpha * grad.relation);
    out.camera = std::max(0.0, w.camera + alpha * grad.camera);
    out.height = std::max(0.0, w.height + alpha * grad.height);
    return out;
}

} // namespace

Weights cd_step(const Weights& weights, std::span<const ParseGraph> data_batch,
                std::span<const ParseGraph> model_samples, const GrammarSpec& spec, double alpha) {
    if (data_batch.empty() || model_samples.empty()) {
        throw ValidationError("contrastive divergence needs nonempty data and model batches");
    }
    const auto grad = difference(mean_term_energies(model_samples, spec), mean_term_energies(data_batch, spec));
    return apply_gradient(weights, grad, alpha);
}

TrainResult train_weights(std::span<const ParseGraph> dataset, const GrammarSpec& spec, const CDConfig& cfg,
                          const ChainConfig& chain) {
    if (dataset.empty()) throw ValidationError("cannot train on an empty dataset");
    if (!(cfg.learning_rate > 0.0) || cfg.iterations < 0 || cfg.sample_count < 1 || cfg.chain_steps_per_iter < 1 ||
        cfg.rebind_fraction < 0.0 || cfg.rebind_fraction > 1.0) {
        throw ValidationError("invalid contrastive-divergence configuration");
    }
    TrainResult result{spec.weights, {}};
    if (cfg.iterations == 0) return result;

    GrammarSpec model = spec;
    Rng rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
    std::uniform_real_distribution<double> rebind(0.0, 1.0);

    struct BoundChain {
        std::size_t data_index;
        LocationChain chain;
    };
    std::vector<BoundChain> pool;
    std::uint64_t chain_counter = 0;
    const auto bind = [&](std::size_t data_index) {
        return BoundChain{data_index,
                          LocationChain(dataset[data_index], model, chain, derive_seed(cfg.seed, ++chain_counter))};
    };

    std::vector<ParseGraph> data_batch(cfg.sample_count);
    std::vector<ParseGraph> model_batch(cfg.sample_count);
    for (int t = 0; t < cfg.iterations; ++t) {
        model.weights = result.weights;
        if (!cfg.persistent || pool.empty()) {
            pool.clear();
            for (int i = 0; i < cfg.sample_count; ++i) pool.push_back(bind(pick(rng)));
        } else {
            for (auto& b : pool) {
                if (cfg.rebind_fraction > 0.0 && rebind(rng) < cfg.rebind_fraction) {
                    b = bind(pick(rng));
                } else {
                    b.chain.resync_energy();
                }
            }
        }
        for (int i = 0; i < cfg.sample_count; ++i) {
            pool[i].chain.advance(cfg.chain_steps_per_iter);
            data_batch[i] = dataset[pool[i].data_index];
            model_batch[i] = pool[i].chain.state();
        }

        TrainRecord rec;
        rec.iteration = t;
        rec.data_means = mean_term_energies(data_batch, model);
        rec.model_means = mean_term_energies(model_batch, model);
        rec.gradient = difference(rec.model_means, rec.data_means);
        result.weights = apply_gradient(result.weights, rec.gradient, cfg.learning_rate);
        rec.weights = result.weights;
        result.trace.push_back(rec);
    }
    return result;
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
    out << "iteration,lambda_d,lambda_c,lambda_h,data_relation,data_camera,data_height,"
           "model_relation,model_camera,model_height\n";
    for (const auto& r : trace) {
        out << r.iteration << ',' << r.weights.relation << ',' << r.weights.camera << ',' << r.weights.height << ','
            << r.data_means.relation << ',' << r.data_means.camera << ',' << r.data_means.height << ','
            << r.model_means.relation << ',' << r.model_means.camera << ',' << r.model_means.height << '\n';
    }
}

} // namespace saog
