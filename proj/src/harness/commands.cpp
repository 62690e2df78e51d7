#include "internal.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/ks.hpp"
#include "conjlab/core/parallel.hpp"
#include "conjlab/core/special.hpp"
#include "conjlab/extremes/asymptotics.hpp"
#include "conjlab/extremes/conditional.hpp"
#include "conjlab/extremes/tail.hpp"
#include "conjlab/gauss/covariance.hpp"
#include "conjlab/gauss/samplers.hpp"
#include "conjlab/pickands/pickands.hpp"
#include "conjlab/sojourn/sojourn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace conjlab::harness {

namespace {

using extremes::ConstantInput;
using limit::EnsembleSpec;
using limit::LimitVariant;

constexpr std::uint64_t kMaxReplicas = 1'000'000'000'000ull;

Json estimate_json(const Estimate& e) {
    return Json{{"mean", number(e.mean)}, {"stderr", number(e.std_error)}, {"n", e.n_replicas}};
}

gauss::StationaryMethod parse_method(const Section& s) {
    const auto m = s.text("method", "auto", {"auto", "circulant", "cholesky", "markov"});
    if (m == "circulant") return gauss::StationaryMethod::Circulant;
    if (m == "cholesky") return gauss::StationaryMethod::Cholesky;
    if (m == "markov") return gauss::StationaryMethod::Markov;
    return gauss::StationaryMethod::Auto;
}

std::string method_name(gauss::StationaryMethod m) {
    switch (m) {
    case gauss::StationaryMethod::Circulant: return "circulant";
    case gauss::StationaryMethod::Cholesky: return "cholesky";
    case gauss::StationaryMethod::Markov: return "markov";
    default: return "auto";
    }
}

pickands::PipelineOptions parse_pipeline(const Section& s) {
    pickands::PipelineOptions o;
    o.a_values = s.numbers("a_values", o.a_values, 0.0, 10.0, true);
    o.S = s.number("S", o.S, 0.0, 1e5, true);
    o.replicas = s.count("replicas", o.replicas, 1, kMaxReplicas);
    o.epsilon = s.number("epsilon", o.epsilon, 0.0, 1.0, true);
    o.auto_extend_S = s.flag("auto_extend_S", o.auto_extend_S);
    o.S_step = s.number("S_step", o.S_step, 0.0, 1e5, true);
    o.S_max = s.number("S_max", o.S_max, 0.0, 1e6, true);
    if (s.has("exponent")) o.exponent = s.number("exponent", std::nullopt, 0.0, 10.0, true);
    else s.accept("exponent");
    return o;
}

Json pipeline_json(const pickands::PipelineOptions& o) {
    Json j{{"a_values", o.a_values}, {"S", o.S},           {"replicas", o.replicas}, {"epsilon", o.epsilon},
           {"auto_extend_S", o.auto_extend_S}, {"S_step", o.S_step}, {"S_max", o.S_max}};
    j["exponent"] = o.exponent ? Json(*o.exponent) : Json(nullptr);
    return j;
}

Json pickands_json(const pickands::PipelineResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.estimate.table.rows)
        rows.push_back({{"a", row.a}, {"S", row.S}, {"K", row.K}, {"replicas", row.replicas}, {"hits", row.hits},
                        {"p_hat", number(row.p_hat)}, {"H_hat", number(row.H_hat)}, {"stderr_H", number(row.stderr_H)}});
    Json cov = Json::array();
    for (const auto& line : r.estimate.table.covariance) {
        Json l = Json::array();
        for (double v : line) l.push_back(number(v));
        cov.push_back(l);
    }
    const auto& e = r.estimate;
    return Json{{"S_requested", r.S_requested},
                {"S_used", r.S_used},
                {"table", rows},
                {"covariance", cov},
                {"estimate",
                 {{"value", number(e.value)},
                  {"stderr", number(e.std_error)},
                  {"method", pickands::to_string(e.method)},
                  {"exponent", e.exponent},
                  {"slope", number(e.slope)},
                  {"max_scaled_residual", number(e.max_scaled_residual)}}}};
}

CsvTable pickands_csv(const std::string& file, const pickands::PipelineResult& r) {
    CsvTable t{file, {"a", "S", "K", "replicas", "hits", "p_hat", "H_hat", "stderr_H"}, {}};
    for (const auto& row : r.estimate.table.rows)
        t.rows.push_back({row.a, row.S, static_cast<std::int64_t>(row.K), static_cast<std::int64_t>(row.replicas),
                          static_cast<std::int64_t>(row.hits), row.p_hat, row.H_hat, row.stderr_H});
    return t;
}

extremes::AsymptoticValue asymptotic_for(const EnsembleSpec& spec, const LimitVariant& v, double T, double u,
                                         ConstantInput H) {
    switch (v.kind) {
    case LimitVariant::Kind::OrderStat:
        return extremes::asymptotic_order_stat(spec.n(), v.j, spec[0].model.alpha(), T, u, H);
    case LimitVariant::Kind::TimeChanged: return extremes::asymptotic_timechanged(spec, T, u, H);
    case LimitVariant::Kind::NonStandard: return extremes::asymptotic_nonstandard(spec, T, u, H);
    default: return extremes::asymptotic_conjunction(spec, T, u, H);
    }
}

/// Explicit constant or an explicit request to estimate it.
struct ConstantSource {
    std::optional<ConstantInput> given;
    std::optional<pickands::PipelineOptions> estimate;

    static std::optional<ConstantSource> parse(const Section& parent, const std::string& key) {
        if (!parent.has(key)) {
            parent.accept(key);
            return std::nullopt;
        }
        const auto s = parent.section(key);
        ConstantSource c;
        if (s.has("value")) {
            c.given = ConstantInput{s.number("value", std::nullopt, 0.0, 1e6), s.number("std_error", 0.0, 0.0, 1e6)};
        } else {
            s.accept("std_error");
            const auto e = s.section("estimate");
            c.estimate = parse_pipeline(e);
            e.finish();
        }
        s.finish();
        return c;
    }

    Json describe() const {
        if (given) return Json{{"source", "given"}, {"value", given->value}, {"std_error", given->std_error}};
        return Json{{"source", "estimated"}, {"options", pipeline_json(*estimate)}};
    }

    std::pair<ConstantInput, Json> resolve(const EnsembleSpec& spec, const LimitVariant& v, StreamLedger& streams,
                                           unsigned jobs, const std::string& label) const {
        if (given) return {*given, describe()};
        auto opts = *estimate;
        opts.jobs = jobs;
        const auto r = pickands::run_pickands(spec, v, opts, streams.next(label));
        Json j = describe();
        j["value"] = number(r.estimate.value);
        j["std_error"] = number(r.estimate.std_error);
        j["pickands"] = pickands_json(r);
        return {ConstantInput{r.estimate.value, r.estimate.std_error}, j};
    }
};

struct TailBlock {
    double T = 1.0;
    std::vector<double> u{1.5, 2.0, 2.5};
    double a = 0.25;
    std::uint64_t replicas = 100000;
    int halvings = 5;
    gauss::StationaryMethod method = gauss::StationaryMethod::Auto;

    void parse(const Section& s) {
        T = s.number("T", T, 0.0, 1e6, true);
        u = s.numbers("u", u, 0.0, 40.0, true);
        a = s.number("a", a, 0.0, 100.0, true);
        replicas = s.count("replicas", replicas, 1, kMaxReplicas);
        halvings = static_cast<int>(s.count("halvings", 5, 1, 20));
        method = parse_method(s);
    }
    Json describe() const {
        return Json{{"T", T}, {"u", u}, {"a", a}, {"replicas", replicas}, {"halvings", halvings},
                    {"method", method_name(method)}};
    }
    extremes::TailQuery query(const EnsembleSpec& spec, const LimitVariant& v, double level) const {
        extremes::TailQuery q{spec};
        q.variant = v;
        q.T = T;
        q.u = level;
        q.a = a;
        q.replicas = replicas;
        q.halvings = halvings;
        q.method = method;
        return q;
    }
};

Json gate_json(const extremes::TailResult& r) {
    Json levels = Json::array();
    for (const auto& l : r.gate.levels)
        levels.push_back({{"a", l.a}, {"step", l.step}, {"points", l.points}, {"mean", number(l.estimate.mean)},
                          {"stderr", number(l.estimate.std_error)}});
    return Json{{"passed", r.gate.passed},
                {"selected_a", r.gate.levels[r.gate.selected].a},
                {"coarse", number(r.gate.coarse)},
                {"fine", number(r.gate.fine)},
                {"message", r.gate.message},
                {"levels", levels}};
}

Json ratio_json(const extremes::AsymptoticValue& asym, const extremes::RatioReport& ratio) {
    return Json{{"asymptotic", {{"value", number(asym.value)}, {"stderr", number(asym.std_error)}, {"tag", extremes::to_string(asym.tag)}}},
                {"ratio",
                 {{"value", number(ratio.ratio)},
                  {"stderr", number(ratio.std_error)},
                  {"ci_lo", number(ratio.ci_lo)},
                  {"ci_hi", number(ratio.ci_hi)},
                  {"ci_level", ratio.ci_level}}}};
}

std::vector<Cell> ratio_cells(const Estimate& emp, const extremes::AsymptoticValue* asym,
                              const extremes::RatioReport* ratio) {
    if (!asym || !(asym->value > 0.0)) return {emp.mean, emp.std_error, std::string{}, std::string{}, std::string{}, std::string{}};
    return {emp.mean, emp.std_error, asym->value, ratio->ratio, ratio->ci_lo, ratio->ci_hi};
}

// ---------------------------------------------------------------------------

class PickandsCommand : public Command {
public:
    PickandsCommand(const Section& s, EnsembleSpec spec, LimitVariant v) : spec_(std::move(spec)), variant_(v) {
        limit::validate(spec_, variant_);
        opts_ = parse_pipeline(s);
        lower_bound_ = s.flag("lower_bound", false);
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        auto opts = opts_;
        opts.jobs = jobs;
        const auto r = pickands::run_pickands(spec_, variant_, opts, streams.next("pickands"));
        Json res{{"command", "pickands"}, {"ensemble", spec_.describe()}, {"variant", variant_.describe()},
                 {"options", pipeline_json(opts_)}};
        res.update(pickands_json(r));
        if (lower_bound_) {
            const double amin = spec_.alpha_min();
            const EnsembleSpec classical({limit::ProcessSpec(gauss::CorrelationModel::powered_exponential(1.0, amin))});
            const auto c = pickands::run_pickands(classical, LimitVariant::standard(), opts, streams.next("classical"));
            const double factor = pickands::lower_bound_factor(spec_);
            const double bound = factor * c.estimate.value;
            const double bound_se = factor * c.estimate.std_error;
            const double se = std::hypot(r.estimate.std_error, bound_se);
            res["lower_bound"] = {{"alpha_min", amin},
                                  {"classical", {{"value", number(c.estimate.value)}, {"stderr", number(c.estimate.std_error)}}},
                                  {"factor", factor},
                                  {"bound", number(bound)},
                                  {"bound_stderr", number(bound_se)},
                                  {"combined_stderr", number(se)},
                                  {"holds", r.estimate.value >= bound - 3.0 * se}};
        }
        return {"pickands", res, {pickands_csv("pickands_table.csv", r)}};
    }

private:
    EnsembleSpec spec_;
    LimitVariant variant_;
    pickands::PipelineOptions opts_;
    bool lower_bound_ = false;
};

class TailCommand : public Command {
public:
    TailCommand(const Section& s, EnsembleSpec spec, LimitVariant v) : spec_(std::move(spec)), variant_(v) {
        limit::validate(spec_, variant_);
        block_.parse(s);
        H_ = ConstantSource::parse(s, "H");
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        Json res{{"command", "tail"}, {"ensemble", spec_.describe()}, {"variant", variant_.describe()},
                 {"query", block_.describe()}};
        std::optional<ConstantInput> H;
        if (H_) {
            auto [value, record] = H_->resolve(spec_, variant_, streams, jobs, "tail.H");
            H = value;
            res["H"] = record;
        } else {
            res["H"] = nullptr;
        }
        CsvTable table{"tail_ratio.csv", {"u", "empirical", "stderr", "asymptotic", "ratio", "ci_lo", "ci_hi"}, {}};
        Json results = Json::array();
        for (double u : block_.u) {
            const auto r = extremes::mc_sup_tail(block_.query(spec_, variant_, u),
                                                 streams.next("tail.u=" + format_cell(u)), jobs);
            Json row{{"u", u}, {"q", r.q}, {"estimate", estimate_json(r.estimate)}, {"gate", gate_json(r)}};
            std::vector<Cell> cells{u};
            if (H) {
                const auto asym = asymptotic_for(spec_, variant_, block_.T, u, *H);
                const auto ratio = asym.value > 0.0 ? extremes::ratio_diagnostic(r.estimate, asym) : extremes::RatioReport{};
                row.update(ratio_json(asym, ratio));
                auto more = ratio_cells(r.estimate, &asym, &ratio);
                cells.insert(cells.end(), more.begin(), more.end());
            } else {
                row["asymptotic"] = nullptr;
                row["ratio"] = nullptr;
                auto more = ratio_cells(r.estimate, nullptr, nullptr);
                cells.insert(cells.end(), more.begin(), more.end());
            }
            results.push_back(row);
            table.rows.push_back(cells);
        }
        res["results"] = results;
        return {"tail", res, {table}};
    }

private:
    EnsembleSpec spec_;
    LimitVariant variant_;
    TailBlock block_;
    std::optional<ConstantSource> H_;
};

class OrderStatsCommand : public Command {
public:
    OrderStatsCommand(const Section& s, EnsembleSpec spec) : spec_(std::move(spec)) {
        const auto n = spec_.n();
        block_.parse(s);
        std::vector<std::uint64_t> all;
        for (std::uint64_t j = 1; j <= n; ++j) all.push_back(j);
        for (auto j : s.counts("j", all, 1, n)) js_.push_back(j);
        for (auto j : js_) limit::validate(spec_, LimitVariant::order_stat(j));
        checks_ = s.flag("checks", true);
        if (s.has("H")) {
            for (const auto& h : s.sections("H")) {
                const auto j = h.count("j", std::nullopt, 1, n);
                H_[j] = ConstantInput{h.number("value", std::nullopt, 0.0, 1e6), h.number("std_error", 0.0, 0.0, 1e6)};
                h.finish();
            }
        } else {
            s.accept("H");
        }
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        Json res{{"command", "order-stats"}, {"ensemble", spec_.describe()}, {"query", block_.describe()}, {"j", js_}};
        CsvTable table{"order_stats.csv", {"j", "u", "empirical", "stderr", "asymptotic", "ratio", "ci_lo", "ci_hi"}, {}};
        Json results = Json::array();
        for (auto j : js_) {
            const auto v = LimitVariant::order_stat(j);
            for (double u : block_.u) {
                const auto r = extremes::mc_sup_tail(block_.query(spec_, v, u),
                                                     streams.next("order.j=" + std::to_string(j) + ".u=" + format_cell(u)), jobs);
                Json row{{"j", j}, {"u", u}, {"estimate", estimate_json(r.estimate)}, {"finest", estimate_json(r.gate.levels.back().estimate)},
                         {"gate", gate_json(r)}};
                std::vector<Cell> cells{static_cast<std::int64_t>(j), u};
                if (auto it = H_.find(j); it != H_.end()) {
                    const auto asym = asymptotic_for(spec_, v, block_.T, u, it->second);
                    const auto ratio = extremes::ratio_diagnostic(r.estimate, asym);
                    row.update(ratio_json(asym, ratio));
                    auto more = ratio_cells(r.estimate, &asym, &ratio);
                    cells.insert(cells.end(), more.begin(), more.end());
                } else {
                    row["asymptotic"] = nullptr;
                    row["ratio"] = nullptr;
                    auto more = ratio_cells(r.estimate, nullptr, nullptr);
                    cells.insert(cells.end(), more.begin(), more.end());
                }
                results.push_back(row);
                table.rows.push_back(cells);
            }
        }
        res["results"] = results;
        std::vector<CsvTable> tables{table};
        if (checks_) {
            CsvTable checks{"order_stats_checks.csv", {"u", "check", "empirical", "stderr", "reference", "reference_stderr", "holds"}, {}};
            Json list = Json::array();
            for (double u : block_.u) check_bounds(u, streams, jobs, checks, list);
            res["checks"] = list;
            tables.push_back(checks);
        }
        return {"order_stats", res, tables};
    }

private:
    Estimate finest(const EnsembleSpec& spec, const LimitVariant& v, double u, StreamLedger& streams,
                    const std::string& label, unsigned jobs) const {
        const auto r = extremes::mc_sup_tail(block_.query(spec, v, u), streams.next(label), jobs);
        return r.gate.levels.back().estimate;
    }

    EnsembleSpec without(std::size_t skip) const {
        std::vector<limit::ProcessSpec> rest;
        for (std::size_t i = 0; i < spec_.n(); ++i)
            if (i != skip) rest.push_back(spec_[i]);
        return EnsembleSpec(rest);
    }

    /// Product identity for the maximum and the union-bound sandwich for the
    /// second smallest order statistic, all at the finest pitch.
    void check_bounds(double u, StreamLedger& streams, unsigned jobs, CsvTable& table, Json& list) const {
        const std::size_t n = spec_.n();
        const std::string tag = ".u=" + format_cell(u);
        std::vector<Estimate> single;
        for (std::size_t i = 0; i < n; ++i)
            single.push_back(finest(EnsembleSpec({spec_[i]}), LimitVariant::standard(), u, streams,
                                    "check.single" + std::to_string(i + 1) + tag, jobs));

        const auto max = finest(spec_, LimitVariant::order_stat(1), u, streams, "check.max" + tag, jobs);
        double none = 1.0, var = 0.0;
        for (const auto& e : single) none *= 1.0 - e.mean;
        for (std::size_t i = 0; i < n; ++i) {
            double others = 1.0;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i) others *= 1.0 - single[k].mean;
            var += std::pow(others * single[i].std_error, 2);
        }
        const double identity = 1.0 - none, identity_se = std::sqrt(var);
        const bool id_ok = std::abs(max.mean - identity) <= 3.0 * std::hypot(max.std_error, identity_se);
        table.rows.push_back({u, std::string("max_identity"), max.mean, max.std_error, identity, identity_se,
                              static_cast<std::int64_t>(id_ok)});
        list.push_back({{"u", u}, {"check", "max_identity"}, {"empirical", estimate_json(max)},
                        {"reference", number(identity)}, {"reference_stderr", number(identity_se)}, {"holds", id_ok}});

        if (n < 2) return;
        const auto mid = finest(spec_, LimitVariant::order_stat(n - 1), u, streams, "check.second" + tag, jobs);
        const auto all = finest(spec_, LimitVariant::standard(), u, streams, "check.all" + tag, jobs);
        double upper = all.mean, upper_var = all.std_error * all.std_error;
        double lower = 0.0, lower_var = 0.0, prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto rest = finest(without(i), LimitVariant::standard(), u, streams,
                                     "check.without" + std::to_string(i + 1) + tag, jobs);
            upper += rest.mean;
            upper_var += rest.std_error * rest.std_error;
            lower += rest.mean * (1.0 - single[i].mean);
            lower_var += std::pow((1.0 - single[i].mean) * rest.std_error, 2) + std::pow(rest.mean * single[i].std_error, 2);
            prod *= single[i].mean;
        }
        lower -= static_cast<double>(n * n) * prod;
        const double up_se = std::sqrt(upper_var), lo_se = std::sqrt(lower_var);
        const bool up_ok = mid.mean <= upper + 3.0 * std::hypot(mid.std_error, up_se);
        const bool lo_ok = mid.mean >= lower - 3.0 * std::hypot(mid.std_error, lo_se);
        table.rows.push_back({u, std::string("sandwich_upper"), mid.mean, mid.std_error, upper, up_se, static_cast<std::int64_t>(up_ok)});
        table.rows.push_back({u, std::string("sandwich_lower"), mid.mean, mid.std_error, lower, lo_se, static_cast<std::int64_t>(lo_ok)});
        list.push_back({{"u", u}, {"check", "sandwich_upper"}, {"empirical", estimate_json(mid)},
                        {"reference", number(upper)}, {"reference_stderr", number(up_se)}, {"holds", up_ok}});
        list.push_back({{"u", u}, {"check", "sandwich_lower"}, {"empirical", estimate_json(mid)},
                        {"reference", number(lower)}, {"reference_stderr", number(lo_se)}, {"holds", lo_ok}});
    }

    EnsembleSpec spec_;
    TailBlock block_;
    std::vector<std::size_t> js_;
    bool checks_ = true;
    std::map<std::size_t, ConstantInput> H_;
};

class SojournCommand : public Command {
public:
    SojournCommand(const Section& s, EnsembleSpec spec) : spec_(std::move(spec)) {
        limit::validate(spec_, LimitVariant::standard());
        u_ = s.numbers("u", std::vector<double>{1.5, 2.5}, 0.0, 40.0, true);
        x_ = s.numbers("x", std::vector<double>{0.5, 1.0}, 0.0, 1e6, true);
        opts_.t = s.number("t", opts_.t, 0.0, 1e6, true);
        if (s.flag("sensitivity", true)) opts_.sensitivity_t = s.number("sensitivity_t", 0.5 * opts_.t, 0.0, 1e6, true);
        else {
            s.accept("sensitivity_t");
            opts_.sensitivity_t.reset();
        }
        opts_.a = s.number("a", opts_.a, 0.0, 100.0, true);
        opts_.replicas = s.count("replicas", opts_.replicas, 1, kMaxReplicas);
        opts_.limit_a = s.number("limit_a", opts_.limit_a, 0.0, 100.0, true);
        opts_.limit_replicas = s.count("limit_replicas", opts_.limit_replicas, 1, kMaxReplicas);
        opts_.epsilon = s.number("epsilon", opts_.epsilon, 0.0, 1.0, true);
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        auto opts = opts_;
        opts.jobs = jobs;
        const auto rep = sojourn::berman_compare(spec_, u_, x_, opts, streams.next("sojourn"));
        const double n = static_cast<double>(spec_.n());
        Json res{{"command", "sojourn"}, {"ensemble", spec_.describe()},
                 {"options",
                  {{"u", u_}, {"x", x_}, {"t", opts_.t},
                   {"sensitivity_t", opts_.sensitivity_t ? Json(*opts_.sensitivity_t) : Json(nullptr)},
                   {"a", opts_.a}, {"replicas", opts_.replicas}, {"limit_a", opts_.limit_a},
                   {"limit_replicas", opts_.limit_replicas}, {"epsilon", opts_.epsilon}}}};
        Json limit_json{{"a", rep.limit.a}, {"K", rep.limit.K}, {"truncation_bound", number(rep.limit.truncation_bound)}};
        Json B = Json::array();
        for (std::size_t k = 0; k < rep.limit.x.size(); ++k)
            B.push_back({{"x", rep.limit.x[k]}, {"B", estimate_json(rep.limit.B[k])}});
        limit_json["B"] = B;
        res["limit"] = limit_json;

        CsvTable means{"sojourn_mean.csv", {"t", "u", "mean", "stderr", "exact", "z"}, {}};
        Json runs = Json::array();
        for (const auto& set : rep.runs) {
            const auto m = set.mean();
            const double exact = set.t * std::pow(normal_survival(set.u), n);
            const double z = m.std_error > 0.0 ? (m.mean - exact) / m.std_error : 0.0;
            runs.push_back({{"t", set.t}, {"u", set.u}, {"step", set.step}, {"points", set.points},
                            {"mean", estimate_json(m)}, {"exact_mean", number(exact)}, {"z", number(z)},
                            {"positive_fraction", number(1.0 - static_cast<double>(set.histogram[0]) / set.replicas)}});
            means.rows.push_back({set.t, set.u, m.mean, m.std_error, exact, z});
        }
        res["runs"] = runs;

        CsvTable berman{"sojourn_berman.csv", {"t", "u", "x", "lhs", "lhs_err", "B_hat", "B_err", "abs_diff", "diff_err"}, {}};
        Json rows = Json::array();
        for (const auto& r : rep.rows) {
            rows.push_back({{"t", r.t}, {"u", r.u}, {"x", r.x}, {"lhs", estimate_json(r.lhs)}, {"B", estimate_json(r.B)},
                            {"abs_diff", number(r.abs_diff)}, {"diff_err", number(r.diff_err)}});
            berman.rows.push_back({r.t, r.u, r.x, r.lhs.mean, r.lhs.std_error, r.B.mean, r.B.std_error, r.abs_diff, r.diff_err});
        }
        res["berman"] = rows;
        Json trends = Json::array();
        for (const auto& t : rep.trends) trends.push_back({{"t", t.t}, {"x", t.x}, {"shrinking", t.shrinking}});
        res["trends"] = trends;
        return {"sojourn", res, {berman, means}};
    }

private:
    EnsembleSpec spec_;
    std::vector<double> u_, x_;
    sojourn::BermanOptions opts_;
};

class LimitLawCommand : public Command {
public:
    LimitLawCommand(const Section& s, EnsembleSpec spec) : spec_(std::move(spec)) {
        limit::validate(spec_, LimitVariant::standard());
        u_ = s.numbers("u", std::vector<double>{1.5, 2.5}, 0.0, 40.0, true);
        times_ = s.numbers("times", std::vector<double>{0.0, 1.0}, 0.0, 1e4);
        replicas_ = s.count("replicas", 30'000'000, 1, kMaxReplicas);
        limit_replicas_ = s.count("limit_replicas", 200'000, 2, kMaxReplicas);
        level_ = s.number("ks_level", 0.05, 0.0, 0.5, true);
        write_samples_ = s.flag("write_samples", false);
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        const auto reference = extremes::limit_excursion_sample(spec_, times_, limit_replicas_, streams.next("limit"), jobs);
        Json res{{"command", "limit-law"}, {"ensemble", spec_.describe()},
                 {"options", {{"u", u_}, {"times", times_}, {"replicas", replicas_}, {"limit_replicas", limit_replicas_},
                              {"ks_level", level_}}}};
        CsvTable table{"limit_law_ks.csv", {"u", "t", "accepted", "reference", "ks", "critical", "pvalue", "pass"}, {}};
        std::vector<CsvTable> tables;
        Json results = Json::array();
        for (double u : u_) {
            const auto s = extremes::conditional_excursion_sample(spec_, u, times_, replicas_,
                                                                  streams.next("conditional.u=" + format_cell(u)), jobs);
            for (std::size_t k = 0; k < times_.size(); ++k) {
                const auto col = s.column(k);
                const auto ref = reference.column(k);
                const double d2 = ks_two_sample(col, ref);
                const double c2 = ks_critical_value(col.size(), ref.size(), level_);
                const double ne = static_cast<double>(col.size()) * ref.size() / (col.size() + ref.size());
                const double p2 = ks_pvalue(d2, ne);
                results.push_back({{"u", u}, {"t", times_[k]}, {"accepted", s.accepted}, {"reference", "limit"},
                                   {"ks", number(d2)}, {"critical", number(c2)}, {"pvalue", number(p2)}, {"pass", d2 <= c2}});
                table.rows.push_back({u, times_[k], static_cast<std::int64_t>(s.accepted), std::string("limit"), d2, c2, p2,
                                      static_cast<std::int64_t>(d2 <= c2)});
                if (times_[k] == 0.0) {
                    const double d1 = ks_statistic_exp1(col);
                    const double c1 = ks_critical_value(col.size(), level_);
                    const double p1 = ks_pvalue(d1, static_cast<double>(col.size()));
                    results.push_back({{"u", u}, {"t", 0.0}, {"accepted", s.accepted}, {"reference", "exp1"},
                                       {"ks", number(d1)}, {"critical", number(c1)}, {"pvalue", number(p1)}, {"pass", d1 <= c1}});
                    table.rows.push_back({u, 0.0, static_cast<std::int64_t>(s.accepted), std::string("exp1"), d1, c1, p1,
                                          static_cast<std::int64_t>(d1 <= c1)});
                }
            }
            if (write_samples_) tables.push_back(sample_table("limit_law_samples_u" + format_cell(u) + ".csv", s));
        }
        if (write_samples_) tables.push_back(sample_table("limit_law_samples_limit.csv", reference));
        res["results"] = results;
        tables.insert(tables.begin(), table);
        return {"limit_law", res, tables};
    }

private:
    static CsvTable sample_table(const std::string& file, const extremes::ExcursionSample& s) {
        CsvTable t{file, {}, {}};
        for (double time : s.times) t.header.push_back("t=" + format_cell(time));
        for (std::size_t r = 0; r < s.rows(); ++r) {
            std::vector<Cell> row;
            for (std::size_t k = 0; k < s.columns(); ++k) row.push_back(s.values[r * s.columns() + k]);
            t.rows.push_back(row);
        }
        return t;
    }

    EnsembleSpec spec_;
    std::vector<double> u_, times_;
    std::uint64_t replicas_ = 0, limit_replicas_ = 0;
    double level_ = 0.05;
    bool write_samples_ = false;
};

class ValidateSamplerCommand : public Command {
public:
    explicit ValidateSamplerCommand(const Section& s) {
        sigma_ = s.number("sigma", 4.0, 0.0, 100.0, true);
        fbm_ = s.has("fbm") || !s.has("stationary");
        if (s.has("fbm")) {
            const auto f = s.section("fbm");
            alphas_ = f.numbers("alphas", alphas_, 0.0, 2.0, true);
            fbm_paths_ = f.count("paths", fbm_paths_, 2, kMaxReplicas);
            fbm_points_ = f.count("points", fbm_points_, 3, 1 << 20);
            if (f.has("pairs")) {
                fbm_pairs_.clear();
                for (const auto& p : f.raw("pairs")) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() || !p[1].is_number_unsigned())
                        throw ConfigError("'validate_sampler.fbm.pairs' entries must be [i, j] index pairs");
                    fbm_pairs_.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
                }
            }
            f.finish();
        } else {
            s.accept("fbm");
        }
        for (const auto& [i, j] : fbm_pairs_)
            if (i >= fbm_points_ || j >= fbm_points_) throw ConfigError("'validate_sampler.fbm.pairs' index beyond the grid");
        stationary_ = s.has("stationary") || !s.has("fbm");
        if (s.has("stationary")) {
            const auto g = s.section("stationary");
            if (g.has("models")) {
                models_.clear();
                for (const auto& m : g.sections("models")) {
                    const auto family = m.text("family", "powered_exponential", {"powered_exponential", "generalized_cauchy"});
                    const double C = m.number("C", 1.0, 0.0, 1e6, true), alpha = m.number("alpha", std::nullopt, 0.0, 2.0, true);
                    models_.push_back(family == "generalized_cauchy"
                                          ? gauss::CorrelationModel::generalized_cauchy(C, alpha, m.number("gamma", 1.0, 0.0, 1e6, true))
                                          : gauss::CorrelationModel::powered_exponential(C, alpha));
                    m.finish();
                }
            } else {
                g.accept("models");
            }
            st_points_ = g.count("points", st_points_, 2, 1 << 22);
            st_step_ = g.number("step", st_step_, 0.0, 1e3, true);
            st_replicas_ = g.count("replicas", st_replicas_, 2, kMaxReplicas);
            const auto lags = g.counts("lags", std::vector<std::uint64_t>(st_lags_.begin(), st_lags_.end()), 0, st_points_ - 1);
            st_lags_.assign(lags.begin(), lags.end());
            method_ = parse_method(g);
            g.finish();
        } else {
            s.accept("stationary");
        }
        s.finish();
    }

    CommandOutput run(StreamLedger& streams, unsigned jobs) const override {
        CsvTable table{"validate_sampler.csv", {"kind", "label", "s", "t", "empirical", "stderr", "exact", "z", "pass"}, {}};
        Json checks = Json::array();
        bool all = true;
        auto record = [&](const std::string& kind, const std::string& label, double s, double t, const Estimate& e,
                          double exact) {
            const double z = e.std_error > 0.0 ? (e.mean - exact) / e.std_error : (e.mean == exact ? 0.0 : INFINITY);
            const bool ok = std::abs(e.mean - exact) <= sigma_ * e.std_error || e.mean == exact;
            all = all && ok;
            table.rows.push_back({kind, label, s, t, e.mean, e.std_error, exact, z, static_cast<std::int64_t>(ok)});
            checks.push_back({{"kind", kind}, {"label", label}, {"s", s}, {"t", t}, {"empirical", estimate_json(e)},
                              {"exact", exact}, {"z", number(z)}, {"pass", ok}});
        };

        if (fbm_) {
            const auto grid = gauss::GridSpec::uniform(1.0, fbm_points_);
            std::vector<gauss::IndexPair> pairs(fbm_pairs_.begin(), fbm_pairs_.end());
            for (double alpha : alphas_) {
                const gauss::FbmSampler sampler(alpha, grid);
                const auto block = streams.next("fbm.alpha=" + format_cell(alpha));
                const auto rows = collect(fbm_paths_, jobs, fbm_points_, [&](std::uint64_t r, std::span<double> out, gauss::SamplerWorkspace& ws) {
                    RandomStream s = block.at(r);
                    sampler.sample(s, out, ws);
                });
                const auto cov = gauss::empirical_covariance(rows, pairs);
                for (std::size_t k = 0; k < pairs.size(); ++k) {
                    const double s = grid.time(pairs[k].first), t = grid.time(pairs[k].second);
                    const double exact = 0.5 * (std::pow(s, alpha) + std::pow(t, alpha) - std::pow(std::abs(t - s), alpha));
                    record("fbm", "alpha=" + format_cell(alpha), s, t, cov[k], exact);
                }
            }
        }
        if (stationary_) {
            const auto grid = gauss::GridSpec::with_step(st_step_, st_points_);
            std::vector<gauss::IndexPair> pairs;
            for (auto lag : st_lags_) pairs.emplace_back(0, lag);
            for (const auto& model : models_) {
                const gauss::StationarySampler sampler(model, grid, method_);
                const auto block = streams.next("stationary." + model.describe());
                const auto rows = collect(st_replicas_, jobs, st_points_, [&](std::uint64_t r, std::span<double> out, gauss::SamplerWorkspace& ws) {
                    RandomStream s = block.at(r);
                    sampler.sample(s, out, ws);
                });
                const auto cov = gauss::empirical_covariance(rows, pairs);
                for (std::size_t k = 0; k < pairs.size(); ++k) {
                    const double t = grid.time(pairs[k].second);
                    record("stationary", model.describe(), 0.0, t, cov[k], model(t));
                }
            }
        }
        Json res{{"command", "validate-sampler"}, {"sigma", sigma_}, {"all_pass", all}, {"checks", checks}};
        return {"validate_sampler", res, {table}};
    }

private:
    template <class Fill>
    static std::vector<std::vector<double>> collect(std::uint64_t n, unsigned jobs, std::size_t m, Fill&& fill) {
        auto chunks = map_chunks<std::vector<std::vector<double>>>(n, jobs, [&](std::uint64_t b, std::uint64_t e) {
            std::vector<std::vector<double>> rows(e - b, std::vector<double>(m));
            gauss::SamplerWorkspace ws;
            for (std::uint64_t r = b; r < e; ++r) fill(r, rows[r - b], ws);
            return rows;
        });
        std::vector<std::vector<double>> rows;
        rows.reserve(n);
        for (auto& c : chunks)
            for (auto& r : c) rows.push_back(std::move(r));
        return rows;
    }

    double sigma_ = 4.0;
    bool fbm_ = true, stationary_ = true;
    std::vector<double> alphas_{0.5, 1.0, 1.5, 2.0};
    std::uint64_t fbm_paths_ = 10000;
    std::size_t fbm_points_ = 256;
    std::vector<std::pair<std::size_t, std::size_t>> fbm_pairs_{{1, 1},     {10, 20},   {50, 50},   {64, 128}, {100, 200},
                                                                {128, 255}, {200, 210}, {255, 255}, {30, 240}, {170, 171}};
    std::vector<gauss::CorrelationModel> models_{gauss::CorrelationModel::powered_exponential(1.0, 1.0),
                                                 gauss::CorrelationModel::generalized_cauchy(1.0, 1.0, 1.0),
                                                 gauss::CorrelationModel::generalized_cauchy(1.0, 1.5, 2.0)};
    std::size_t st_points_ = 512;
    double st_step_ = 1.0 / 64.0;
    std::uint64_t st_replicas_ = 10000;
    std::vector<std::size_t> st_lags_{1, 2, 4, 8, 16, 32, 64, 128};
    gauss::StationaryMethod method_ = gauss::StationaryMethod::Auto;
};

const std::vector<std::string> kBlocks{"pickands", "tail", "order_stats", "sojourn", "limit_law", "validate_sampler"};

} // namespace

std::string block_name(const std::string& command) {
    std::string b = command;
    std::replace(b.begin(), b.end(), '-', '_');
    return b;
}

std::unique_ptr<Command> parse_command(const std::string& command, const Json& config) {
    const Section root(config, "");
    const auto version = root.count("schema_version", std::nullopt, 0, 1000);
    if (version != static_cast<std::uint64_t>(kSchemaVersion))
        throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    if (root.has("seed")) root.count("seed", std::nullopt, 0, std::numeric_limits<std::uint64_t>::max());
    else root.accept("seed");

    std::optional<EnsembleSpec> spec;
    if (root.has("ensemble")) spec = parse_ensemble(root.section("ensemble"));
    else root.accept("ensemble");
    LimitVariant variant = LimitVariant::standard();
    if (root.has("variant")) variant = parse_variant(root.section("variant"));
    else root.accept("variant");
    auto need_spec = [&](const std::string& block) -> const EnsembleSpec& {
        if (!spec) throw ConfigError("command block '" + block + "' needs an 'ensemble' section");
        return *spec;
    };

    const Json empty = Json::object();
    std::unique_ptr<Command> chosen;
    const std::string wanted = block_name(command);
    if (std::find(kBlocks.begin(), kBlocks.end(), wanted) == kBlocks.end())
        throw ConfigError("unknown command '" + command + "'");
    for (const auto& block : kBlocks) {
        if (!root.has(block) && block != wanted) {
            root.accept(block);
            continue;
        }
        const Section s = root.has(block) ? root.section(block) : Section(empty, block);
        std::unique_ptr<Command> cmd;
        if (block == "pickands") cmd = std::make_unique<PickandsCommand>(s, need_spec(block), variant);
        else if (block == "tail") cmd = std::make_unique<TailCommand>(s, need_spec(block), variant);
        else if (block == "order_stats") cmd = std::make_unique<OrderStatsCommand>(s, need_spec(block));
        else if (block == "sojourn") cmd = std::make_unique<SojournCommand>(s, need_spec(block));
        else if (block == "limit_law") cmd = std::make_unique<LimitLawCommand>(s, need_spec(block));
        else cmd = std::make_unique<ValidateSamplerCommand>(s);
        if (block == wanted) chosen = std::move(cmd);
    }
    root.finish();
    return chosen;
}

} // namespace conjlab::harness
