#include <doctest.h>

#include "conjlab/core/error.hpp"
#include "conjlab/harness/config.hpp"
#include "conjlab/harness/runner.hpp"

#include <cstdlib>
#include <unistd.h>
#include <fstream>
#include <sstream>

using namespace conjlab;
using namespace conjlab::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("conjlab_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const fs::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const char* kTail = R"(schema_version: 1
seed: 11
ensemble:
  n: 2
  process: {family: powered_exponential, C: 1, alpha: 1}
tail:
  u: [2.0, 1.5, 2.5]
  replicas: 9000
  halvings: 2
  H: {value: 1.1, std_error: 0.01}
)";

int run_quiet(RunRequest req) {
    std::ostringstream log;
    return run(req, log);
}

} // namespace

TEST_CASE("config sections reject unknown keys and out-of-range values") {
    const Json doc = parse_document("a: 1\nb: [1, 2]\nc: {d: true}\n");
    Section s(doc, "");
    CHECK(s.count("a", std::nullopt, 0, 5) == 1);
    CHECK_THROWS_AS(s.finish(), ConfigError);
    CHECK(s.numbers("b", std::nullopt, 0.0, 5.0) == std::vector<double>{1.0, 2.0});
    const auto c = s.section("c");
    CHECK(c.flag("d", false));
    c.finish();
    s.finish();

    const Json bad = parse_document("{\"a\": 7, \"r\": 1e6, \"f\": 0.5}");
    Section t(bad, "root");
    CHECK_THROWS_WITH_AS(t.count("a", std::nullopt, 0, 5), doctest::Contains("root.a"), ConfigError);
    CHECK(t.count("r", std::nullopt, 1, 1'000'000'000) == 1'000'000);
    CHECK_THROWS_AS(t.count("f", std::nullopt, 0, 5), ConfigError);
    CHECK_THROWS_AS(t.number("missing", std::nullopt, 0.0, 1.0), ConfigError);
}

TEST_CASE("YAML and JSON encodings parse to the same tree") {
    const auto y = parse_document("x: 1\ny: 2.5\nz: [a, 'b']\nw: ~\nv: false\ns: '3'\n");
    const auto j = parse_document(R"({"x": 1, "y": 2.5, "z": ["a", "b"], "w": null, "v": false, "s": "3"})");
    CHECK(y == j);
}

TEST_CASE("ensemble parsing") {
    const auto doc = parse_document(R"(
processes:
  - {alpha: 1}
  - {family: generalized_cauchy, alpha: 1.5, C: 2, gamma: 3, b: 2}
  - {alpha: 1, theta: {discrete: [{value: 0.5, prob: 0.5}, {value: 1, prob: 0.5}]}}
)");
    const auto spec = parse_ensemble(Section(doc, "ensemble"));
    CHECK(spec.n() == 3);
    CHECK(spec[1].b == 2.0);
    CHECK(spec[1].model.gamma() == 3.0);
    CHECK(spec[2].theta.has_value());

    const auto alpha = parse_document("process: {alpha: 2.5}\nn: 2\n");
    CHECK_THROWS_WITH_AS(parse_ensemble(Section(alpha, "ensemble")), doctest::Contains("(0, 2]"), ConfigError);
    const auto both = parse_document("process: {alpha: 1}\nprocesses: [{alpha: 1}]\n");
    CHECK_THROWS_AS(parse_ensemble(Section(both, "ensemble")), ConfigError);
}

TEST_CASE("invalid alpha exits with a configuration error") {
    TempDir dir;
    std::string text = kTail;
    text.replace(text.find("alpha: 1}"), 9, "alpha: 2.5}");
    RunRequest req{"tail", write_file(dir.path / "c.yaml", text), std::nullopt, dir.path / "out", 1, "both"};
    CHECK(run_quiet(req) == kExitConfig);
    CHECK(slurp(dir.path / "out" / "error.json").find("(0, 2]") != std::string::npos);

    RunRequest unknown{"tail", write_file(dir.path / "u.yaml", std::string(kTail) + "extra: 1\n"), std::nullopt,
                       dir.path / "out2", 1, "both"};
    CHECK(run_quiet(unknown) == kExitConfig);
    RunRequest missing{"tail", dir.path / "nope.yaml", std::nullopt, dir.path / "out3", 1, "both"};
    CHECK(run_quiet(missing) == kExitConfig);
}

TEST_CASE("result files are byte-identical across worker counts and manifest reruns") {
    TempDir dir;
    const auto cfg = write_file(dir.path / "c.yaml", kTail);
    CHECK(run_quiet({"tail", cfg, std::nullopt, dir.path / "a", 1, "both"}) == kExitOk);
    CHECK(run_quiet({"tail", cfg, std::nullopt, dir.path / "b", 3, "both"}) == kExitOk);
    CHECK(run_quiet({"tail", dir.path / "a" / "manifest.json", std::nullopt, dir.path / "c", 2, "both"}) == kExitOk);
    const auto manifest = Json::parse(slurp(dir.path / "a" / "manifest.json"));
    CHECK(manifest["master_seed"] == 11);
    CHECK(manifest["seed_source"] == "config");
    CHECK(manifest["outputs"].size() == 3);
    for (const auto& out : manifest["outputs"]) {
        const auto file = out["file"].get<std::string>();
        CHECK(slurp(dir.path / "a" / file) == slurp(dir.path / "b" / file));
        CHECK(slurp(dir.path / "a" / file) == slurp(dir.path / "c" / file));
        CHECK(sha256_file(dir.path / "b" / file) == out["sha256"].get<std::string>());
    }
    CHECK(run_quiet({"tail", cfg, std::uint64_t{12}, dir.path / "d", 1, "both"}) == kExitOk);
    CHECK(slurp(dir.path / "a" / "tail.json") != slurp(dir.path / "d" / "tail.json"));
}

TEST_CASE("seed precedence: flag over environment over config") {
    TempDir dir;
    const auto cfg = write_file(dir.path / "c.yaml", kTail);
    ::setenv(kSeedEnvVar, "99", 1);
    CHECK(run_quiet({"tail", cfg, std::nullopt, dir.path / "env", 1, "json"}) == kExitOk);
    CHECK(run_quiet({"tail", cfg, std::uint64_t{5}, dir.path / "cli", 1, "json"}) == kExitOk);
    ::setenv(kSeedEnvVar, "not-a-number", 1);
    CHECK(run_quiet({"tail", cfg, std::nullopt, dir.path / "bad", 1, "json"}) == kExitConfig);
    ::unsetenv(kSeedEnvVar);
    const auto env = Json::parse(slurp(dir.path / "env" / "manifest.json"));
    CHECK(env["master_seed"] == 99);
    CHECK(env["seed_source"] == "env");
    CHECK(env["config"]["seed"] == 99);
    const auto cli = Json::parse(slurp(dir.path / "cli" / "manifest.json"));
    CHECK(cli["master_seed"] == 5);
    CHECK(cli["seed_source"] == "cli");
}

TEST_CASE("tail writes one ratio row per u and a monotone plot file") {
    TempDir dir;
    const auto cfg = write_file(dir.path / "c.yaml", kTail);
    REQUIRE(run_quiet({"tail", cfg, std::nullopt, dir.path, 1, "both"}) == kExitOk);
    const auto table = lines(dir.path / "tail_ratio.csv");
    CHECK(table.size() == 4);
    CHECK(table[0] == "u,empirical,stderr,asymptotic,ratio,ci_lo,ci_hi");
    const auto plot = lines(dir.path / "plot_ratio_vs_u.csv");
    REQUIRE(plot.size() == 4);
    CHECK(plot[1].rfind("1.5,", 0) == 0);
    CHECK(plot[2].rfind("2,", 0) == 0);
    CHECK(plot[3].rfind("2.5,", 0) == 0);

    fs::remove(dir.path / "plot_ratio_vs_u.csv");
    CHECK(run_quiet({"plot-data", std::nullopt, std::nullopt, dir.path, 1, "both"}) == kExitOk);
    CHECK(lines(dir.path / "plot_ratio_vs_u.csv") == plot);
    TempDir empty;
    CHECK(run_quiet({"plot-data", std::nullopt, std::nullopt, empty.path, 1, "both"}) == kExitConfig);
}

TEST_CASE("pickands and sojourn plot data shapes") {
    TempDir dir;
    const auto cfg = write_file(dir.path / "c.yaml", R"(schema_version: 1
ensemble: {n: 1, process: {alpha: 2}}
pickands: {replicas: 4000}
sojourn: {u: [1.5], x: [0.5, 1.0], replicas: 20000, limit_replicas: 2000, limit_a: 0.125, sensitivity: false}
)");
    REQUIRE(run_quiet({"pickands", cfg, std::nullopt, dir.path, 1, "both"}) == kExitOk);
    CHECK(lines(dir.path / "plot_H_vs_a.csv").size() == lines(dir.path / "pickands_table.csv").size());
    REQUIRE(run_quiet({"sojourn", cfg, std::nullopt, dir.path, 1, "both"}) == kExitOk);
    const auto overlay = lines(dir.path / "plot_berman_t1_u1.5.csv");
    REQUIRE(overlay.size() == 3);
    CHECK(overlay[0] == "x,lhs,lhs_err,B_hat,B_err");
}

TEST_CASE("infeasible conditional sampling is refused with advice") {
    TempDir dir;
    const auto cfg = write_file(dir.path / "c.yaml", R"(schema_version: 1
ensemble: {n: 2, process: {alpha: 1}}
limit_law: {u: [4.0], replicas: 100000}
)");
    CHECK(run_quiet({"limit-law", cfg, std::nullopt, dir.path, 1, "both"}) == kExitRefused);
    const auto err = Json::parse(slurp(dir.path / "error.json"));
    CHECK(err["exit_code"] == 2);
    CHECK(err["advice"].get<std::string>().find("lower u") != std::string::npos);
}

TEST_CASE("schema version and command blocks are checked") {
    TempDir dir;
    const auto v2 = write_file(dir.path / "v2.yaml", "schema_version: 2\nensemble: {process: {alpha: 1}}\n");
    CHECK(run_quiet({"tail", v2, std::nullopt, dir.path / "o", 1, "both"}) == kExitConfig);
    const auto no_ens = write_file(dir.path / "ne.yaml", "schema_version: 1\ntail: {u: 2}\n");
    CHECK(run_quiet({"tail", no_ens, std::nullopt, dir.path / "o", 1, "both"}) == kExitConfig);
    const auto typo = write_file(dir.path / "t.yaml",
                                 "schema_version: 1\nensemble: {process: {alpha: 1}}\nsojourn: {replica: 3}\n");
    CHECK(run_quiet({"tail", typo, std::nullopt, dir.path / "o", 1, "both"}) == kExitConfig);
}
