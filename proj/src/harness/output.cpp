#include "internal.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/harness/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace conjlab::harness {

namespace fs = std::filesystem;

std::string format_cell(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const double x = std::get<double>(c);
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(const fs::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_cell(row[k]);
        out << '\n';
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

StreamBlock StreamLedger::next(const std::string& label) {
    const std::uint64_t job = next_job_++;
    const auto block = master_.job(job);
    records_.push_back({{"label", label}, {"job", job}, {"base", block.base}});
    return block;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 initialisation failed");
    }
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char two[3];
    for (unsigned int k = 0; k < len; ++k) {
        std::snprintf(two, sizeof two, "%02x", md[k]);
        hex += two;
    }
    return hex;
}

namespace {

double num(const Json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

/// (u, ratio, ratio_err) rows sorted by u.
CsvTable ratio_plot(const std::string& file, const Json& rows) {
    CsvTable t{file, {"u", "ratio", "ratio_err"}, {}};
    std::vector<std::tuple<double, double, double>> pts;
    for (const auto& r : rows)
        if (r.contains("ratio") && r["ratio"].is_object())
            pts.emplace_back(num(r["u"]), num(r["ratio"]["value"]), num(r["ratio"]["stderr"]));
    std::sort(pts.begin(), pts.end());
    for (const auto& [u, v, e] : pts) t.rows.push_back({u, v, e});
    return t;
}

std::vector<CsvTable> plots_for(const std::string& name, const Json& res) {
    std::vector<CsvTable> out;
    if (name == "tail") {
        out.push_back(ratio_plot("plot_ratio_vs_u.csv", res.at("results")));
    } else if (name == "order_stats") {
        std::map<std::int64_t, Json> by_j;
        for (const auto& r : res.at("results")) by_j[r.at("j").get<std::int64_t>()].push_back(r);
        for (const auto& [j, rows] : by_j) out.push_back(ratio_plot("plot_order_stats_ratio_j" + std::to_string(j) + ".csv", rows));
    } else if (name == "pickands") {
        CsvTable t{"plot_H_vs_a.csv", {"a", "H_hat", "stderr_H"}, {}};
        for (const auto& r : res.at("table")) t.rows.push_back({num(r["a"]), num(r["H_hat"]), num(r["stderr_H"])});
        out.push_back(t);
    } else if (name == "sojourn") {
        std::map<std::pair<double, double>, CsvTable> by_tu;
        for (const auto& r : res.at("berman")) {
            const double t = num(r["t"]), u = num(r["u"]);
            auto [it, fresh] = by_tu.try_emplace({t, u});
            if (fresh)
                it->second = CsvTable{"plot_berman_t" + format_cell(t) + "_u" + format_cell(u) + ".csv",
                                      {"x", "lhs", "lhs_err", "B_hat", "B_err"}, {}};
            it->second.rows.push_back({num(r["x"]), num(r["lhs"]["mean"]), num(r["lhs"]["stderr"]), num(r["B"]["mean"]),
                                       num(r["B"]["stderr"])});
        }
        for (auto& [_, t] : by_tu) out.push_back(std::move(t));
    }
    return out;
}

const std::vector<std::string> kResultNames{"pickands", "tail", "order_stats", "sojourn", "limit_law", "validate_sampler"};

} // namespace

std::vector<std::string> write_plot_data(const fs::path& dir, const std::string& name, const Json& result) {
    std::vector<std::string> files;
    for (const auto& t : plots_for(name, result)) {
        write_csv(dir / t.file, t);
        files.push_back(t.file);
    }
    return files;
}

std::vector<std::string> emit_plot_data(const fs::path& dir) {
    std::vector<std::string> files;
    bool found = false;
    for (const auto& name : kResultNames) {
        const auto path = dir / (name + ".json");
        if (!fs::exists(path)) continue;
        found = true;
        std::ifstream in(path, std::ios::binary);
        Json res;
        try {
            res = Json::parse(in);
        } catch (const Json::exception& e) {
            throw ConfigError("cannot parse result file '" + path.string() + "': " + e.what());
        }
        auto more = write_plot_data(dir, name, res);
        files.insert(files.end(), more.begin(), more.end());
    }
    if (!found) throw ConfigError("no result files (*.json from a previous run) found in '" + dir.string() + "'");
    return files;
}

} // namespace conjlab::harness
