#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "saog/model.hpp"

namespace saog {

namespace edit {
struct Move {
    int index = 0;
    Vec3 delta;
};
struct Rotate {
    int index = 0;
    double delta = 0.0;
};
struct Retype {
    int index = 0;
    int label = 0;
};
struct Resize {
    int index = 0;
    std::string size_name;
};
struct Add {
    ObjectInstance object;
};
struct Remove {
    int index = 0;
};
struct SetRelation {
    Relation relation;
    bool present = true;
};
} // namespace edit

using EditOp = std::variant<edit::Move, edit::Rotate, edit::Retype, edit::Resize, edit::Add, edit::Remove,
                            edit::SetRelation>;

struct EditResult {
    ParseGraph graph;
    EnergyBreakdown energy;
    std::vector<Diagnostic> diagnostics;
};

/// Threshold above which |bottom height| is reported as an outlier.
inline constexpr double kHeightOutlier = 0.05;

/// An editable scene. Each applied edit is kept with the graph it replaced.
/// An edit that exactly inverts the most recent one (a move by the negated
/// offset, a rotation by the negated angle, removing the object just added)
/// pops that entry and restores the stored graph bit for bit.
class SceneSession {
public:
    SceneSession(std::string id, std::shared_ptr<const GrammarSpec> spec, ParseGraph initial);

    const std::string& id() const { return id_; }
    const GrammarSpec& spec() const { return *spec_; }
    const ParseGraph& initial() const { return initial_; }
    const ParseGraph& graph() const { return graph_; }
    std::size_t undo_depth() const { return undo_.size(); }
    const std::vector<EditOp>& history() const { return history_; }
    /// Monotone per session; bumped on every successful mutation.
    long revision() const { return revision_; }

    /// Replaces the graph wholesale (re-layout); clears the undo stack.
    void reset(ParseGraph g);

    EditResult apply(const EditOp& op);

private:
    std::string id_;
    std::shared_ptr<const GrammarSpec> spec_;
    ParseGraph initial_;
    ParseGraph graph_;
    std::vector<EditOp> history_;
    std::vector<ParseGraph> undo_;
    long revision_ = 0;
};

/// Applies `op` to the session; throws ValidationError for invalid indices
/// or for object counts outside the configured scene sizes.
EditResult apply_edit(SceneSession& session, const EditOp& op);

/// `op` applied to a copy of `g`, without session bookkeeping.
ParseGraph apply_op(const ParseGraph& g, const GrammarSpec& spec, const EditOp& op);

/// Violated relations and height/camera outliers of a graph.
std::vector<Diagnostic> edit_diagnostics(const ParseGraph& g, const GrammarSpec& spec);

EditOp edit_op_from_json(const nlohmann::json& j);
nlohmann::json edit_op_to_json(const EditOp& op);

} // namespace saog
