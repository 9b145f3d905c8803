#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "saog/mcmc.hpp"
#include "saog/model.hpp"
#include "saog/session.hpp"

namespace httplib {
class Server;
}

namespace saog {

inline constexpr const char* kVersion = "0.3.0";

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    ChainConfig sample_chain;
    ChainConfig resample_chain = conditional_chain_defaults();
    /// When set, sessions are written there as SPG1 files on shutdown.
    std::optional<std::filesystem::path> snapshot_dir;
};

/// Session store and request handlers. Transport independent: `handle` takes
/// a method, a path and a body, which is what the HTTP layer forwards.
class SceneService {
public:
    SceneService(std::shared_ptr<const GrammarSpec> spec, ServiceConfig config);

    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

    std::size_t session_count() const;
    /// Writes every session as `<id>.spg` into the snapshot directory.
    void snapshot() const;

    const ServiceConfig& config() const { return config_; }

private:
    struct Entry {
        mutable std::shared_mutex mutex;
        SceneSession session;
        Entry(std::string id, std::shared_ptr<const GrammarSpec> spec, ParseGraph g)
            : session(std::move(id), std::move(spec), std::move(g)) {}
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    nlohmann::json state_json(const SceneSession& s) const;

    HttpResponse create_session(const std::string& body);
    HttpResponse get_session(const std::string& id);
    HttpResponse post_edit(const std::string& id, const std::string& body);
    HttpResponse resample(const std::string& id, const std::string& body);
    HttpResponse instance_map(const std::string& id);
    HttpResponse infer(const std::string& body);
    HttpResponse health() const;

    std::shared_ptr<const GrammarSpec> spec_;
    ServiceConfig config_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::atomic<long> next_id_{1};
};

/// Routes every endpoint of `service` on `server`.
void mount_routes(httplib::Server& server, SceneService& service);

} // namespace saog
