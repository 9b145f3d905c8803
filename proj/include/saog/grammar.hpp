#pragma once

#include <cstdint>
#include <vector>

#include "saog/model.hpp"
#include "saog/random.hpp"

namespace saog {

/// Throws ValidationError listing every violated GrammarSpec invariant.
void validate_spec(const GrammarSpec& spec);

/// Structural and symbol checks of `g` against `spec`; empty when valid.
std::vector<Diagnostic> validate(const GrammarSpec& spec, const ParseGraph& g);

/// Draws the configuration, object instances and relation set from the
/// branch distributions, places objects from the location histogram resting on
/// the ground, then relaxes the layout with the location chain.
ParseGraph sample_parse_graph(const GrammarSpec& spec, const ChainConfig& chain, std::uint64_t seed);

/// Structure only (no location chain): configuration, labels, sizes, relations
/// and the initial resting placement.
ParseGraph sample_structure(const GrammarSpec& spec, Rng& rng);

/// Fresh initial placement of every object: ground-plane position drawn from
/// the location histogram, resting on the ground, uniform rotation.
void place_objects(const GrammarSpec& spec, ParseGraph& g, Rng& rng);

struct LogProb {
    double branch_logp = 0.0;
    EnergyBreakdown energy;
    /// branch_logp - energy.total; the normalizer of the energy model is omitted.
    double unnormalized() const { return branch_logp - energy.total; }
};

LogProb log_prob_unnormalized(const GrammarSpec& spec, const ParseGraph& g);

/// CLEVR-like grammar: 48 labels, small/large sizes, front/right relations,
/// object counts 3..10, uniform histogram over the CLEVR ground area.
GrammarSpec default_clevr_spec();

} // namespace saog
