#include "saog/session.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"

namespace saog {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_index(const ParseGraph& g, int index) {
    if (index < 0 || index >= static_cast<int>(g.objects.size())) {
        throw ValidationError("object index " + std::to_string(index) + " out of range (scene has " +
                              std::to_string(g.objects.size()) + " objects)");
    }
}

void check_count(const GrammarSpec& spec, int count) {
    if (count > spec.max_objects()) {
        throw ValidationError("scene would have " + std::to_string(count) +
                              " objects, above the maximum configured object count " +
                              std::to_string(spec.max_objects()));
    }
    if (!spec.config_index(count)) {
        std::ostringstream configured;
        for (const auto& c : spec.configs) configured << ' ' << c.objects;
        throw ValidationError("no scene configuration with " + std::to_string(count) +
                              " objects (configured:" + configured.str() + ")");
    }
}

double wrap_degrees(double theta) {
    double t = std::fmod(theta, 360.0);
    if (t < 0.0) t += 360.0;
    return t >= 360.0 ? 0.0 : t;
}

bool cancels(const EditOp& previous, const EditOp& op, const ParseGraph& current) {
    if (const auto* a = std::get_if<edit::Move>(&previous)) {
        const auto* b = std::get_if<edit::Move>(&op);
        return b && a->index == b->index && b->delta == -a->delta;
    }
    if (const auto* a = std::get_if<edit::Rotate>(&previous)) {
        const auto* b = std::get_if<edit::Rotate>(&op);
        return b && a->index == b->index && b->delta == -a->delta;
    }
    if (std::holds_alternative<edit::Add>(previous)) {
        const auto* b = std::get_if<edit::Remove>(&op);
        return b && b->index == static_cast<int>(current.objects.size()) - 1;
    }
    if (const auto* a = std::get_if<edit::SetRelation>(&previous)) {
        const auto* b = std::get_if<edit::SetRelation>(&op);
        return b && a->relation == b->relation && a->present != b->present;
    }
    return false;
}

template <typename T>
T op_field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
    try {
        return j[name].get<T>();
    } catch (const std::exception& e) {
        throw ValidationError(std::string("field '") + name + "': " + e.what());
    }
}

} // namespace

ParseGraph apply_op(const ParseGraph& g, const GrammarSpec& spec, const EditOp& op) {
    ParseGraph out = g;
    std::visit(overloaded{
                   [&](const edit::Move& m) {
                       check_index(out, m.index);
                       out.objects[m.index].location = out.objects[m.index].location + m.delta;
                   },
                   [&](const edit::Rotate& r) {
                       check_index(out, r.index);
                       out.objects[r.index].rotation = wrap_degrees(out.objects[r.index].rotation + r.delta);
                   },
                   [&](const edit::Retype& r) {
                       check_index(out, r.index);
                       if (r.label < 0 || r.label >= static_cast<int>(spec.catalog.size())) {
                           throw ValidationError("unknown label " + std::to_string(r.label));
                       }
                       out.objects[r.index].label_index = r.label;
                   },
                   [&](const edit::Resize& r) {
                       check_index(out, r.index);
                       const auto s = spec.size_index(r.size_name);
                       if (!s) throw ValidationError("unknown size '" + r.size_name + "'");
                       out.objects[r.index].size_name = r.size_name;
                       out.objects[r.index].half_extent = spec.sizes[*s].half_extent;
                   },
                   [&](const edit::Add& a) {
                       check_count(spec, static_cast<int>(out.objects.size()) + 1);
                       out.objects.push_back(a.object);
                       out.n_s = static_cast<int>(out.objects.size());
                   },
                   [&](const edit::Remove& r) {
                       check_index(out, r.index);
                       check_count(spec, static_cast<int>(out.objects.size()) - 1);
                       out.objects.erase(out.objects.begin() + r.index);
                       out.n_s = static_cast<int>(out.objects.size());
                       std::vector<Relation> kept;
                       for (auto rel : out.relations) {
                           if (rel.subject == r.index || rel.object == r.index) continue;
                           if (rel.subject > r.index) --rel.subject;
                           if (rel.object > r.index) --rel.object;
                           kept.push_back(rel);
                       }
                       out.relations = std::move(kept);
                   },
                   [&](const edit::SetRelation& s) {
                       const auto& rel = s.relation;
                       check_index(out, rel.subject);
                       check_index(out, rel.object);
                       if (rel.subject == rel.object) throw ValidationError("relation subject equals object");
                       if (rel.relation_type < 0 || rel.relation_type >= static_cast<int>(spec.relation_types.size())) {
                           throw ValidationError("unknown relation type " + std::to_string(rel.relation_type));
                       }
                       auto& rels = out.relations;
                       rels.erase(std::remove(rels.begin(), rels.end(), rel), rels.end());
                       if (s.present) rels.push_back(rel);
                       canonicalize_relations(rels);
                   },
               },
               op);
    const auto diags = validate(spec, out);
    if (!diags.empty()) throw ValidationError("edit would leave an invalid scene: " + diags.front().message);
    return out;
}

std::vector<Diagnostic> edit_diagnostics(const ParseGraph& g, const GrammarSpec& spec) {
    std::vector<Diagnostic> out;
    for (int k = 0; k < static_cast<int>(g.relations.size()); ++k) {
        const auto& r = g.relations[k];
        const double e = relation_energy(r, g.objects, spec.relation_types, spec.weights.paper_literal_sign);
        if (e > 0.0) {
            std::ostringstream msg;
            msg << "relation " << k << " (" << r.subject << ' ' << spec.relation_types[r.relation_type].name << " of "
                << r.object << ") violated by " << e;
            out.push_back({"violated_relation", k, msg.str()});
        }
    }
    const auto& hist = spec.location_hist;
    for (int i = 0; i < static_cast<int>(g.objects.size()); ++i) {
        const auto& o = g.objects[i];
        if (std::abs(o.bottom_height()) > kHeightOutlier) {
            std::ostringstream msg;
            msg << "object " << i << " bottom is " << o.bottom_height() << " from the ground";
            out.push_back({"height_outlier", i, msg.str()});
        }
        const auto bin = hist.bin_of(o.location.x, o.location.y);
        if (!bin || hist.at((*bin)[0], (*bin)[1]) <= hist.epsilon * (1.0 + 1e-9)) {
            out.push_back({"camera_outlier", i, "object " + std::to_string(i) + " lies where no data was observed"});
        }
    }
    return out;
}

SceneSession::SceneSession(std::string id, std::shared_ptr<const GrammarSpec> spec, ParseGraph initial)
    : id_(std::move(id)), spec_(std::move(spec)), initial_(std::move(initial)), graph_(initial_) {
    const auto diags = validate(*spec_, graph_);
    if (!diags.empty()) throw ValidationError("session graph is invalid: " + diags.front().message);
}

void SceneSession::reset(ParseGraph g) {
    const auto diags = validate(*spec_, g);
    if (!diags.empty()) throw ValidationError("session graph is invalid: " + diags.front().message);
    initial_ = g;
    graph_ = std::move(g);
    history_.clear();
    undo_.clear();
    ++revision_;
}

EditResult SceneSession::apply(const EditOp& op) {
    if (!history_.empty() && cancels(history_.back(), op, graph_)) {
        graph_ = std::move(undo_.back());
        undo_.pop_back();
        history_.pop_back();
    } else {
        ParseGraph next = apply_op(graph_, *spec_, op);
        undo_.push_back(std::move(graph_));
        history_.push_back(op);
        graph_ = std::move(next);
    }
    ++revision_;
    return {graph_, total_energy(graph_, *spec_), edit_diagnostics(graph_, *spec_)};
}

EditResult apply_edit(SceneSession& session, const EditOp& op) { return session.apply(op); }

EditOp edit_op_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
        throw ValidationError("field 'op': expected one of move, rotate, retype, resize, add, remove, set_relation");
    }
    const auto kind = j["op"].get<std::string>();
    const auto get_int = [&](const char* name) {
        if (!j.contains(name) || !j[name].is_number_integer()) {
            throw ValidationError(std::string("field '") + name + "': expected an integer");
        }
        return j[name].get<int>();
    };
    if (kind == "move") return edit::Move{get_int("index"), op_field<Vec3>(j, "delta")};
    if (kind == "rotate") return edit::Rotate{get_int("index"), op_field<double>(j, "delta")};
    if (kind == "retype") return edit::Retype{get_int("index"), get_int("label")};
    if (kind == "resize") return edit::Resize{get_int("index"), op_field<std::string>(j, "size")};
    if (kind == "add") return edit::Add{op_field<ObjectInstance>(j, "object")};
    if (kind == "remove") return edit::Remove{get_int("index")};
    if (kind == "set_relation") {
        return edit::SetRelation{op_field<Relation>(j, "relation"),
                                 j.value("present", true)};
    }
    throw ValidationError("field 'op': unknown edit '" + kind + "'");
}

nlohmann::json edit_op_to_json(const EditOp& op) {
    using nlohmann::json;
    return std::visit(overloaded{
                          [](const edit::Move& m) { return json{{"op", "move"}, {"index", m.index}, {"delta", m.delta}}; },
                          [](const edit::Rotate& r) {
                              return json{{"op", "rotate"}, {"index", r.index}, {"delta", r.delta}};
                          },
                          [](const edit::Retype& r) {
                              return json{{"op", "retype"}, {"index", r.index}, {"label", r.label}};
                          },
                          [](const edit::Resize& r) {
                              return json{{"op", "resize"}, {"index", r.index}, {"size", r.size_name}};
                          },
                          [](const edit::Add& a) { return json{{"op", "add"}, {"object", a.object}}; },
                          [](const edit::Remove& r) { return json{{"op", "remove"}, {"index", r.index}}; },
                          [](const edit::SetRelation& s) {
                              return json{{"op", "set_relation"}, {"relation", s.relation}, {"present", s.present}};
                          },
                      },
                      op);
}

} // namespace saog
