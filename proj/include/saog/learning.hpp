#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "saog/model.hpp"

namespace saog {

struct BranchProbs {
    std::map<int, double> configs;           // n_s -> probability
    std::map<int, double> labels;            // label index -> probability
    std::map<std::string, double> sizes;     // size name -> probability
    std::vector<double> relation_priors;     // per relation type, clamped
};

/// Empirical (maximum-likelihood) branch distributions of a dataset.
/// `relation_type_count` sizes the prior vector; pairs are ordered pairs.
BranchProbs fit_branch_probs(std::span<const ParseGraph> dataset, std::size_t relation_type_count);

/// Writes fitted branch probabilities into `spec`. Catalog and size entries not
/// seen in the data get probability zero; configurations are replaced.
void apply_branch_probs(GrammarSpec& spec, const BranchProbs& probs);

inline constexpr double kRelationPriorClamp = 1e-4;

struct CDConfig {
    double learning_rate = 0.01;
    int iterations = 500;
    int sample_count = 64;
    int chain_steps_per_iter = 50;
    bool persistent = true;
    /// Per-iteration probability that a persistent chain restarts at a fresh data graph.
    double rebind_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct TermMeans {
    double relation = 0.0;
    double camera = 0.0;
    double height = 0.0;
};

/// Per-term mean energy sums over a set of graphs.
TermMeans mean_term_energies(std::span<const ParseGraph> graphs, const GrammarSpec& spec);

struct TrainRecord {
    int iteration = 0;
    Weights weights; // after the update
    TermMeans data_means;
    TermMeans model_means;
    TermMeans gradient; // model mean minus data mean
};

using TrainTrace = std::vector<TrainRecord>;

/// One contrastive-divergence update with a nonnegativity projection:
/// lambda_u <- max(0, lambda_u + alpha * (model mean E_u - data mean E_u)).
Weights cd_step(const Weights& weights, std::span<const ParseGraph> data_batch,
                std::span<const ParseGraph> model_samples, const GrammarSpec& spec, double alpha);

struct TrainResult {
    Weights weights;
    TrainTrace trace;
};

/// Contrastive-divergence training of the energy weights, starting from
/// `spec.weights`. Negative-phase chains start at data graphs and keep their
/// structure; with `cfg.persistent` they carry their layouts across iterations.
TrainResult train_weights(std::span<const ParseGraph> dataset, const GrammarSpec& spec, const CDConfig& cfg,
                          const ChainConfig& chain);

void write_trace_csv(std::ostream& out, const TrainTrace& trace);

} // namespace saog
