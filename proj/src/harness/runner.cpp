#include "conjlab/harness/runner.hpp"

#include "internal.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/parallel.hpp"

#include <chrono>
#include <cstdlib>
#include <ostream>

namespace conjlab::harness {

namespace fs = std::filesystem;

const std::vector<std::string>& commands() {
    static const std::vector<std::string> list{"pickands", "tail",           "order-stats", "sojourn",
                                               "limit-law", "validate-sampler", "plot-data"};
    return list;
}

namespace {

std::uint64_t parse_seed_text(const std::string& text, const std::string& origin) {
    try {
        std::size_t used = 0;
        if (text.empty() || text[0] == '-') throw std::invalid_argument("negative");
        const auto v = std::stoull(text, &used, 0);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin + " must be a non-negative integer, got '" + text + "'");
    }
}

void write_error(const fs::path& out, int code, const std::string& kind, const std::string& message,
                 const std::string& advice, std::ostream& log) {
    log << "error (" << kind << "): " << message << '\n';
    if (!advice.empty()) log << "advice: " << advice << '\n';
    try {
        fs::create_directories(out);
        write_json(out / "error.json", Json{{"exit_code", code}, {"kind", kind}, {"message", message}, {"advice", advice}});
    } catch (const std::exception&) {
    }
}

} // namespace

int run(const RunRequest& req, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    try {
        if (req.format != "json" && req.format != "csv" && req.format != "both")
            throw ConfigError("--format must be json, csv or both");
        if (req.command == "plot-data") {
            for (const auto& f : emit_plot_data(req.out)) log << "wrote " << (req.out / f).string() << '\n';
            return kExitOk;
        }
        if (!req.config) throw ConfigError("--config is required for '" + req.command + "'");

        Json doc = load_document(*req.config);
        if (doc.is_object() && doc.contains("manifest_version")) {
            if (!doc.contains("command") || doc["command"] != req.command)
                throw ConfigError("manifest was written by a different command");
            doc = doc.at("config");
        }
        auto cmd = parse_command(req.command, doc);

        std::uint64_t seed = kDefaultSeed;
        std::string source = "default";
        if (req.seed) {
            seed = *req.seed;
            source = "cli";
        } else if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
            seed = parse_seed_text(env, kSeedEnvVar);
            source = "env";
        } else if (doc.contains("seed")) {
            seed = doc["seed"].get<std::uint64_t>();
            source = "config";
        }
        Json echo = doc;
        echo["seed"] = seed;

        fs::create_directories(req.out);
        fs::remove(req.out / "error.json");
        StreamLedger streams(seed);
        auto output = cmd->run(streams, req.jobs);
        output.result["seeds"] = {{"master_seed", seed}, {"streams", streams.records()}};

        std::vector<std::string> files;
        if (req.format != "csv") {
            write_json(req.out / (output.name + ".json"), output.result);
            files.push_back(output.name + ".json");
        }
        if (req.format != "json")
            for (const auto& t : output.tables) {
                write_csv(req.out / t.file, t);
                files.push_back(t.file);
            }
        for (const auto& f : write_plot_data(req.out, output.name, output.result)) files.push_back(f);

        Json digests = Json::array();
        for (const auto& f : files) digests.push_back({{"file", f}, {"sha256", sha256_file(req.out / f)}});
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Json manifest{{"manifest_version", 1},
                      {"tool", "conjlab " CONJLAB_VERSION},
                      {"command", req.command},
                      {"master_seed", seed},
                      {"seed_source", source},
                      {"seed_env_var", kSeedEnvVar},
                      {"config", echo},
                      {"jobs", resolve_jobs(req.jobs)},
                      {"wall_time_seconds", wall},
                      {"streams", streams.records()},
                      {"outputs", digests}};
        write_json(req.out / "manifest.json", manifest);
        log << req.command << ": wrote " << files.size() << " files to " << req.out.string() << " in " << wall << " s\n";
        return kExitOk;
    } catch (const FeasibilityError& e) {
        write_error(req.out, kExitRefused, "refused", e.what(), e.advice(), log);
        return kExitRefused;
    } catch (const ConfigError& e) {
        write_error(req.out, kExitConfig, "config", e.what(), "", log);
        return kExitConfig;
    } catch (const DomainError& e) {
        write_error(req.out, kExitConfig, "config", e.what(), "", log);
        return kExitConfig;
    } catch (const ModelInconsistencyError& e) {
        write_error(req.out, kExitConfig, "config", e.what(), "", log);
        return kExitConfig;
    } catch (const std::exception& e) {
        write_error(req.out, kExitInternal, "internal", e.what(), "", log);
        return kExitInternal;
    }
}

} // namespace conjlab::harness
