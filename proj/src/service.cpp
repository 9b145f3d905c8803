#include "saog/service.hpp"

#include <fstream>
#include <regex>

#include "httplib.h"

#include "saog/codec.hpp"
#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"
#include "saog/mcmc.hpp"
#include "saog/projection.hpp"

namespace saog {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
    json body{{"error", message}};
    static const std::regex field_re("field '([^']+)'");
    std::smatch m;
    if (std::regex_search(message, m, field_re)) body["field"] = m[1].str();
    return json_response(status, body);
}

json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw ValidationError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON body: ") + e.what(), e.byte);
    }
}

/// Rejects a stale optimistic-concurrency tag.
bool stale(const json& body, long revision) {
    if (!body.contains("revision")) return false;
    if (!body["revision"].is_number_integer()) throw ValidationError("field 'revision': expected an integer");
    return body["revision"].get<long>() != revision;
}

} // namespace

SceneService::SceneService(std::shared_ptr<const GrammarSpec> spec, ServiceConfig config)
    : spec_(std::move(spec)), config_(std::move(config)) {
    validate_spec(*spec_);
}

std::size_t SceneService::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<SceneService::Entry> SceneService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

json SceneService::state_json(const SceneSession& s) const {
    json boxes = json::array();
    for (const auto& o : s.graph().objects) {
        try {
            boxes.push_back(project_object_bbox(spec_->camera, o));
        } catch (const BehindCameraError&) {
            boxes.push_back(nullptr);
        }
    }
    return json{{"id", s.id()},
                {"revision", s.revision()},
                {"graph", s.graph()},
                {"energy", total_energy(s.graph(), *spec_)},
                {"diagnostics", edit_diagnostics(s.graph(), *spec_)},
                {"boxes", boxes},
                {"undo_depth", s.undo_depth()}};
}

HttpResponse SceneService::handle(const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex session_re("^/sessions/([A-Za-z0-9_-]+)(/edits|/resample|/instance-map)?$");
    try {
        if (path == "/health" && method == "GET") return health();
        if (path == "/sessions" && method == "POST") return create_session(body);
        if (path == "/infer" && method == "POST") return infer(body);
        std::smatch m;
        if (std::regex_match(path, m, session_re)) {
            const std::string id = m[1].str();
            const std::string tail = m[2].str();
            if (tail.empty() && method == "GET") return get_session(id);
            if (tail == "/edits" && method == "POST") return post_edit(id, body);
            if (tail == "/resample" && method == "POST") return resample(id, body);
            if (tail == "/instance-map" && method == "GET") return instance_map(id);
            return error_response(405, method + " not allowed on " + path);
        }
        return error_response(404, "no route for " + method + " " + path);
    } catch (const FormatError& e) {
        return error_response(400, e.what());
    } catch (const ValidationError& e) {
        return error_response(400, e.what());
    } catch (const UnknownSymbolError& e) {
        return error_response(400, e.what());
    } catch (const BehindCameraError& e) {
        return error_response(422, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

HttpResponse SceneService::create_session(const std::string& body) {
    const auto req = parse_body(body);
    ParseGraph g;
    if (req.contains("graph")) {
        try {
            g = req["graph"].get<ParseGraph>();
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("field 'graph': ") + e.what());
        }
    } else {
        std::uint64_t seed = 0;
        if (req.contains("seed")) {
            if (!req["seed"].is_number_unsigned()) throw ValidationError("field 'seed': expected a nonnegative integer");
            seed = req["seed"].get<std::uint64_t>();
        }
        g = sample_parse_graph(*spec_, config_.sample_chain, seed);
    }
    const std::string id = "s" + std::to_string(next_id_++);
    auto entry = std::make_shared<Entry>(id, spec_, std::move(g));
    json state = state_json(entry->session);
    {
        std::unique_lock lock(sessions_mutex_);
        sessions_.emplace(id, std::move(entry));
    }
    return json_response(201, state);
}

HttpResponse SceneService::get_session(const std::string& id) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session " + id);
    std::shared_lock lock(entry->mutex);
    return json_response(200, state_json(entry->session));
}

HttpResponse SceneService::post_edit(const std::string& id, const std::string& body) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session " + id);
    const auto req = parse_body(body);
    if (!req.contains("op")) throw ValidationError("missing field 'op'");
    const EditOp op = edit_op_from_json(req["op"]);

    std::unique_lock lock(entry->mutex);
    auto& s = entry->session;
    if (stale(req, s.revision())) {
        return json_response(409, json{{"error", "stale revision"}, {"revision", s.revision()}});
    }
    apply_edit(s, op);
    return json_response(200, state_json(s));
}

HttpResponse SceneService::resample(const std::string& id, const std::string& body) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session " + id);
    const auto req = parse_body(body);
    ChainConfig chain = config_.resample_chain;
    if (req.contains("chain")) {
        try {
            from_json(req["chain"], chain);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("field 'chain': ") + e.what());
        }
    }
    std::uint64_t seed = 0;
    if (req.contains("seed")) {
        if (!req["seed"].is_number_unsigned()) throw ValidationError("field 'seed': expected a nonnegative integer");
        seed = req["seed"].get<std::uint64_t>();
    }

    std::unique_lock lock(entry->mutex);
    auto& s = entry->session;
    if (stale(req, s.revision())) {
        return json_response(409, json{{"error", "stale revision"}, {"revision", s.revision()}});
    }
    s.reset(sample_conditional_layout(s.graph(), *spec_, chain, seed));
    return json_response(200, state_json(s));
}

HttpResponse SceneService::instance_map(const std::string& id) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session " + id);
    std::shared_lock lock(entry->mutex);
    auto map = rasterize_instance_map(entry->session.graph(), *spec_);
    map.source_id = id;
    const auto bytes = encode_instance_map(map);
    return {200, "application/octet-stream", std::string(bytes.begin(), bytes.end())};
}

HttpResponse SceneService::infer(const std::string& body) {
    const auto req = parse_body(body);
    if (!req.contains("objects")) throw ValidationError("missing field 'objects'");
    std::vector<ObjectInstance> objects;
    try {
        objects = req["objects"].get<std::vector<ObjectInstance>>();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("field 'objects': ") + e.what());
    }
    if (objects.empty()) throw ValidationError("field 'objects': at least one object is required");
    const std::string method = req.value("method", std::string("map"));
    std::vector<Relation> relations;
    if (method == "map") {
        relations = infer_relations_map(objects, *spec_);
    } else if (method == "gibbs") {
        relations = infer_relations_gibbs(objects, *spec_, req.value("sweeps", 200), {}, req.value("seed", 0ULL));
    } else {
        throw ValidationError("field 'method': expected 'map' or 'gibbs'");
    }
    return json_response(200, json{{"relations", relations}});
}

HttpResponse SceneService::health() const {
    return json_response(200, json{{"status", "ok"}, {"version", kVersion}, {"sessions", session_count()}});
}

void SceneService::snapshot() const {
    if (!config_.snapshot_dir) return;
    std::filesystem::create_directories(*config_.snapshot_dir);
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, entry] : sessions_) {
        std::shared_lock session_lock(entry->mutex);
        const auto bytes = encode_parse_graph_compact(entry->session.graph(), *spec_);
        std::ofstream out(*config_.snapshot_dir / (id + ".spg"), std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
}

void mount_routes(httplib::Server& server, SceneService& service) {
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto out = service.handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
}

} // namespace saog
