#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "saog/model.hpp"
#include "saog/random.hpp"

namespace saog {

struct MhStep {
    long step = 0;
    int object = -1;
    bool accepted = false;
    double temperature = 1.0;
    /// Energy change of the proposal, whether or not it was accepted.
    double proposed_delta = 0.0;
    /// Incrementally tracked total energy after the step.
    double energy = 0.0;
    const ParseGraph* state = nullptr;
};

using MhObserver = std::function<void(const MhStep&)>;

/// Single-site Metropolis-Hastings over object locations and rotations.
///
/// Each step picks one object uniformly and perturbs (x, y, z, theta) with
/// independent Gaussian noise. Acceptance uses only the energy terms that touch
/// the moved object, so a step costs O(relations of that object + objects).
/// The chain owns its graph and random stream and can be advanced repeatedly,
/// which is how persistent negative-phase chains are kept during learning.
class LocationChain {
public:
    LocationChain(ParseGraph g, const GrammarSpec& spec, const ChainConfig& cfg, std::uint64_t seed);

    /// Runs `steps` proposals at `temperature`. Returns the number accepted.
    long advance(long steps, double temperature = 1.0, const MhObserver& observer = {});

    const ParseGraph& state() const { return graph_; }
    double energy() const { return energy_; }
    long steps_taken() const { return step_; }

    /// Full recomputation of the tracked energy, discarding accumulated rounding.
    void resync_energy();

private:
    double local_energy(int object) const;

    const GrammarSpec* spec_;
    ChainConfig cfg_;
    ParseGraph graph_;
    Rng rng_;
    std::vector<std::vector<int>> incident_; // object -> relation indices
    double energy_ = 0.0;
    long step_ = 0;
};

struct MhResult {
    ParseGraph graph;
    double acceptance_rate = 0.0;
};

/// Runs `cfg.steps` proposals in total; the first `cfg.burn_in` are excluded
/// from the reported acceptance rate. Seeded by `cfg.seed`.
MhResult sample_locations_mh(const ParseGraph& g, const GrammarSpec& spec, const ChainConfig& cfg,
                             const MhObserver& observer = {});

/// Writes one CSV row per step (step, total energy, acceptance flag).
MhObserver csv_trace_observer(std::ostream& out);

/// Conditional generation: keeps objects' attributes and the relation set,
/// re-places every object and runs the location chain with `cfg`.
ParseGraph sample_conditional_layout(const ParseGraph& g, const GrammarSpec& spec, const ChainConfig& cfg,
                                     std::uint64_t seed);

/// Chain settings used for conditional re-layout: the temperature is lowered
/// geometrically to 0.001 over the run so pinned relations settle.
ChainConfig conditional_chain_defaults();

/// Posterior log-odds of including `rel` given the object layout.
double relation_log_odds(const Relation& rel, std::span<const ObjectInstance> objects, const GrammarSpec& spec);

/// Exact MAP relation set: every (ordered pair, type) with positive log-odds.
std::vector<Relation> infer_relations_map(std::span<const ObjectInstance> objects, const GrammarSpec& spec);

using GibbsObserver = std::function<void(int sweep, double temperature, const std::vector<bool>& included)>;

/// Gibbs sampling over edge-inclusion variables with an annealing schedule.
/// Sweep s runs at temperature_schedule[min(s, size-1)]; an empty schedule
/// anneals geometrically from 1 to 0.01. Sweeps at or below
/// `kGibbsFreezeTemperature` take the zero-temperature limit.
std::vector<Relation> infer_relations_gibbs(std::span<const ObjectInstance> objects, const GrammarSpec& spec,
                                            int sweeps, const std::vector<double>& temperature_schedule,
                                            std::uint64_t seed, const GibbsObserver& observer = {});

inline constexpr double kGibbsFreezeTemperature = 0.05;

/// Every (ordered pair, type) whose geometry satisfies the relation strictly
/// beyond `margin`; the annotation convention used by CLEVR.
std::vector<Relation> relations_from_layout(std::span<const ObjectInstance> objects,
                                            std::span<const RelationType> types, double margin = 0.0);

} // namespace saog
