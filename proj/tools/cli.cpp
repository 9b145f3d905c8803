#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "acceptance.hpp"
#include "saog/codec.hpp"
#include "saog/dataset.hpp"
#include "saog/energy.hpp"
#include "saog/errors.hpp"
#include "saog/grammar.hpp"
#include "saog/json_io.hpp"
#include "saog/learning.hpp"
#include "saog/mcmc.hpp"
#include "saog/projection.hpp"
#include "saog/service.hpp"

namespace saog::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

GrammarSpec spec_or_default(const std::string& path) {
    return path.empty() ? default_clevr_spec() : load_spec(path);
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void emit_json(const std::string& out, const json& j) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json_file(out, j);
    }
}

struct ChainFlags {
    int steps = ChainConfig{}.steps;
    int burn_in = ChainConfig{}.burn_in;
    void add(CLI::App* app) {
        app->add_option("--steps", steps, "Location-chain steps per scene")->check(CLI::NonNegativeNumber);
        app->add_option("--burn-in", burn_in, "Steps excluded from acceptance statistics")
            ->check(CLI::NonNegativeNumber);
    }
    ChainConfig config() const {
        ChainConfig c;
        c.steps = steps;
        c.burn_in = burn_in;
        return c;
    }
};

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

/// "host:port", ":port" or "port".
void parse_bind(const std::string& bind, ServiceConfig& cfg) {
    const auto colon = bind.rfind(':');
    const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
    if (colon != std::string::npos && colon > 0) cfg.host = bind.substr(0, colon);
    try {
        cfg.port = std::stoi(port);
    } catch (const std::exception&) {
        throw ValidationError("SAOG_BIND: bad port in '" + bind + "'");
    }
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Scene grammar engine: sampling, learning, inference and projection of scene parse graphs", "saog"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string spec_path;
    app.add_option("--spec", spec_path, "Grammar spec JSON (default: built-in CLEVR-like grammar)")
        ->check(CLI::ExistingFile);

    // default-spec
    auto* cmd_default = app.add_subcommand("default-spec", "Write the built-in grammar spec as JSON");
    std::string default_out;
    cmd_default->add_option("-o,--out", default_out, "Output file (stdout if omitted)");

    // sample
    auto* cmd_sample = app.add_subcommand("sample", "Sample parse graphs from the grammar");
    int sample_n = 1;
    std::uint64_t sample_seed = 0;
    std::string sample_out, sample_maps;
    ChainFlags sample_chain;
    cmd_sample->add_option("-n,--n", sample_n, "Number of scenes")->check(CLI::PositiveNumber);
    cmd_sample->add_option("--seed", sample_seed, "Random seed");
    cmd_sample->add_option("-o,--out", sample_out, "Dataset JSON output (stdout if omitted)");
    cmd_sample->add_option("--maps", sample_maps, "Directory for SIMAP1 instance maps, one per scene");
    sample_chain.add(cmd_sample);

    // learn
    auto* cmd_learn = app.add_subcommand("learn", "Fit branch probabilities, location histogram and weights");
    std::string learn_data, learn_out, learn_trace;
    CDConfig learn_cd;
    ChainFlags learn_chain;
    int learn_bins = 32;
    double learn_sigma = 1.0;
    bool learn_skip_weights = false;
    cmd_learn->add_option("--data", learn_data, "Dataset JSON")->required()->check(CLI::ExistingFile);
    cmd_learn->add_option("-o,--out", learn_out, "Fitted spec JSON (stdout if omitted)");
    cmd_learn->add_option("--trace", learn_trace, "CSV trace of the weight updates");
    cmd_learn->add_option("--iterations", learn_cd.iterations, "Contrastive-divergence iterations")
        ->check(CLI::NonNegativeNumber);
    cmd_learn->add_option("--lr", learn_cd.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
    cmd_learn->add_option("--samples", learn_cd.sample_count, "Negative-phase chains")->check(CLI::PositiveNumber);
    cmd_learn->add_option("--chain-steps", learn_cd.chain_steps_per_iter, "Chain steps per iteration")
        ->check(CLI::PositiveNumber);
    cmd_learn->add_option("--seed", learn_cd.seed, "Random seed");
    cmd_learn->add_option("--bins", learn_bins, "Histogram bins per axis")->check(CLI::Range(2, 4096));
    cmd_learn->add_option("--sigma", learn_sigma, "Histogram smoothing in bins")->check(CLI::NonNegativeNumber);
    cmd_learn->add_flag("--skip-weights", learn_skip_weights, "Keep the spec's energy weights");
    learn_chain.add(cmd_learn);

    // infer
    auto* cmd_infer = app.add_subcommand("infer", "Infer the relation set of a layout");
    std::string infer_objects, infer_out, infer_method = "map";
    int infer_sweeps = 200;
    std::uint64_t infer_seed = 0;
    cmd_infer->add_option("--objects", infer_objects, "Objects JSON (array, or a graph with an 'objects' key)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_infer->add_option("--method", infer_method, "map or gibbs")->check(CLI::IsMember({"map", "gibbs"}));
    cmd_infer->add_option("--sweeps", infer_sweeps, "Gibbs sweeps")->check(CLI::PositiveNumber);
    cmd_infer->add_option("--seed", infer_seed, "Gibbs seed");
    cmd_infer->add_option("-o,--out", infer_out, "Output JSON (stdout if omitted)");

    // project
    auto* cmd_project = app.add_subcommand("project", "Render a parse graph to a 9-channel instance map");
    std::string project_graph, project_out, project_ppm;
    cmd_project->add_option("--graph", project_graph, "Parse graph JSON")->required()->check(CLI::ExistingFile);
    cmd_project->add_option("-o,--out", project_out, "SIMAP1 output")->required();
    cmd_project->add_option("--ppm", project_ppm, "Optional PPM preview of the label channels");

    // ingest
    auto* cmd_ingest = app.add_subcommand("ingest", "Convert CLEVR scene annotations into a dataset");
    std::string ingest_scenes, ingest_out;
    IngestOptions ingest_opts;
    cmd_ingest->add_option("--scenes", ingest_scenes, "CLEVR scenes JSON")->required()->check(CLI::ExistingFile);
    cmd_ingest->add_option("-o,--out", ingest_out, "Dataset JSON output (stdout if omitted)");
    cmd_ingest->add_option("--relations", ingest_opts.relation_filter, "Relation names to keep")->delimiter(',');

    // encode / decode
    auto* cmd_encode = app.add_subcommand("encode", "Encode a parse graph with the compact SPG1 codec");
    std::string encode_graph, encode_out;
    cmd_encode->add_option("--graph", encode_graph, "Parse graph JSON")->required()->check(CLI::ExistingFile);
    cmd_encode->add_option("-o,--out", encode_out, "SPG1 output")->required();
    auto* cmd_decode = app.add_subcommand("decode", "Decode an SPG1 file into parse graph JSON");
    std::string decode_in, decode_out;
    cmd_decode->add_option("--in", decode_in, "SPG1 input")->required()->check(CLI::ExistingFile);
    cmd_decode->add_option("-o,--out", decode_out, "Parse graph JSON output (stdout if omitted)");

    // serve
    auto* cmd_serve = app.add_subcommand("serve", "Start the HTTP scene service");
    std::string serve_bind, serve_snapshots;
    cmd_serve->add_option("--bind", serve_bind, "host:port (default: $SAOG_BIND or 127.0.0.1:8080)");
    cmd_serve->add_option("--snapshot-dir", serve_snapshots, "Write sessions as SPG1 files on shutdown");

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "Run the acceptance criteria and print a report");
    acceptance::Options eval_opts = acceptance::default_options();
    std::string eval_report;
    cmd_eval->add_option("--filter", eval_opts.filter, "Only criteria whose name contains this");
    cmd_eval->add_flag("--regenerate-golden", eval_opts.regenerate_golden, "Rewrite golden instance maps");
    cmd_eval->add_option("--report", eval_report, "Also write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "saog: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (cmd_serve->parsed() && spec_path.empty()) {
            if (const char* env = std::getenv("SAOG_SPEC")) spec_path = env;
        }
        const GrammarSpec spec = spec_or_default(spec_path);

        if (cmd_default->parsed()) {
            emit_json(default_out, json(default_clevr_spec()));
        } else if (cmd_sample->parsed()) {
            const auto ds = synth_dataset(spec, sample_n, sample_chain.config(), sample_seed);
            emit_json(sample_out, json(ds));
            if (!sample_maps.empty()) {
                for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
                    auto map = rasterize_instance_map(ds.graphs[i], spec);
                    char name[32];
                    std::snprintf(name, sizeof name, "scene_%05zu.simap", i);
                    write_bytes(fs::path(sample_maps) / name, encode_instance_map(map));
                }
            }
        } else if (cmd_learn->parsed()) {
            const auto ds = read_json_file(learn_data).get<SceneDataset>();
            if (ds.graphs.empty()) throw ValidationError("dataset has no graphs");
            GrammarSpec fitted = spec;
            apply_branch_probs(fitted, fit_branch_probs(ds.graphs, fitted.relation_types.size()));
            std::vector<std::array<double, 2>> points;
            for (const auto& g : ds.graphs) {
                for (const auto& o : g.objects) points.push_back({o.location.x, o.location.y});
            }
            if (!points.empty()) {
                fitted.location_hist =
                    fit_location_histogram(points, bounds_from_locations(points), learn_bins, learn_sigma,
                                           std::min(spec.location_hist.epsilon, 0.5 / (learn_bins * learn_bins)));
            }
            if (!learn_skip_weights) {
                const auto trained = train_weights(ds.graphs, fitted, learn_cd, learn_chain.config());
                fitted.weights = trained.weights;
                if (!learn_trace.empty()) {
                    std::ofstream trace(learn_trace);
                    if (!trace) throw Error("cannot write " + learn_trace);
                    write_trace_csv(trace, trained.trace);
                }
            }
            validate_spec(fitted);
            emit_json(learn_out, json(fitted));
        } else if (cmd_infer->parsed()) {
            const auto doc = read_json_file(infer_objects);
            const auto objects = (doc.is_object() && doc.contains("objects") ? doc["objects"] : doc)
                                     .get<std::vector<ObjectInstance>>();
            const auto relations = infer_method == "map"
                                       ? infer_relations_map(objects, spec)
                                       : infer_relations_gibbs(objects, spec, infer_sweeps, {}, infer_seed);
            ParseGraph g;
            g.objects = objects;
            g.n_s = static_cast<int>(objects.size());
            g.relations = relations;
            emit_json(infer_out, json{{"relations", relations}, {"energy", total_energy(g, spec)}});
        } else if (cmd_project->parsed()) {
            const auto g = read_json_file(project_graph).get<ParseGraph>();
            auto map = rasterize_instance_map(g, spec);
            map.source_id = fs::path(project_graph).stem().string();
            write_bytes(project_out, encode_instance_map(map));
            if (!project_ppm.empty()) write_bytes(project_ppm, instance_map_ppm(map));
        } else if (cmd_ingest->parsed()) {
            emit_json(ingest_out, json(ingest_clevr_scenes(fs::path(ingest_scenes), spec, ingest_opts)));
        } else if (cmd_encode->parsed()) {
            write_bytes(encode_out, encode_parse_graph_compact(read_json_file(encode_graph).get<ParseGraph>(), spec));
        } else if (cmd_decode->parsed()) {
            emit_json(decode_out, json(decode_parse_graph_compact(read_bytes(decode_in), spec)));
        } else if (cmd_serve->parsed()) {
            ServiceConfig cfg;
            if (serve_bind.empty()) {
                if (const char* env = std::getenv("SAOG_BIND")) serve_bind = env;
            }
            if (!serve_bind.empty()) parse_bind(serve_bind, cfg);
            if (!serve_snapshots.empty()) cfg.snapshot_dir = serve_snapshots;
            SceneService service(std::make_shared<const GrammarSpec>(spec), cfg);
            httplib::Server server;
            mount_routes(server, service);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "saog " << kVersion << " listening on " << cfg.host << ':' << cfg.port << std::endl;
            const bool ok = server.listen(cfg.host, cfg.port);
            g_server = nullptr;
            service.snapshot();
            if (!ok) throw Error("could not bind " + cfg.host + ":" + std::to_string(cfg.port));
        } else if (cmd_eval->parsed()) {
            const auto results = acceptance::run_all(eval_opts, [](const acceptance::CriterionResult& r) {
                std::cout << acceptance::format_line(r) << std::endl;
            });
            if (!eval_report.empty()) {
                json report = json::array();
                for (const auto& r : results) {
                    report.push_back({{"name", r.name},
                                      {"passed", r.passed},
                                      {"applicable", r.applicable},
                                      {"detail", r.detail},
                                      {"seconds", r.seconds},
                                      {"limit_seconds", r.limit_seconds}});
                }
                write_json_file(eval_report, report);
            }
            return acceptance::all_passed(results) ? 0 : 1;
        }
    } catch (const FormatError& e) {
        std::cerr << "saog: format error at byte " << e.offset() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "saog: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace saog::cli
