#include "conjlab/pickands/pickands.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/parallel.hpp"
#include "conjlab/limit/limit_process.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conjlab::pickands {

namespace {

struct ChainGeometry {
    std::vector<double> a;           // decreasing
    std::vector<std::size_t> stride; // a_i / a_finest
    std::vector<std::size_t> K;
    std::size_t K_finest = 0;
};

ChainGeometry chain_geometry(std::vector<double> a_values, double S) {
    if (a_values.empty()) throw InsufficientDataError("no pitch values given");
    if (!(S > 0.0) || !std::isfinite(S)) throw DomainError("S must be positive");
    for (double a : a_values)
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("pitch a must be positive");
    std::sort(a_values.begin(), a_values.end(), std::greater<>());
    if (std::adjacent_find(a_values.begin(), a_values.end()) != a_values.end())
        throw ConfigError("pitch values must be distinct");
    ChainGeometry g;
    g.a = a_values;
    const double finest = a_values.back();
    for (double a : a_values) {
        const double ratio = a / finest;
        const double r = std::round(ratio);
        const auto s = static_cast<std::size_t>(r);
        if (std::abs(ratio - r) > 1e-9 * r || (s & (s - 1)) != 0)
            throw ConfigError("pitch values must form a dyadic chain (each a power-of-two multiple of the finest)");
        g.stride.push_back(s);
    }
    const auto K_coarse = static_cast<std::size_t>(std::ceil(S / a_values.front() - 1e-9));
    g.K_finest = K_coarse * g.stride.front();
    for (auto s : g.stride) g.K.push_back(g.K_finest / s);
    return g;
}

struct ChunkCounts {
    std::vector<std::uint64_t> hits;
    std::vector<std::uint64_t> joint;  // row-major R x R
};

} // namespace

double PickandsTable::cov(std::size_t i, std::size_t j) const {
    if (!covariance.empty()) return covariance.at(i).at(j);
    return i == j ? rows.at(i).stderr_H * rows.at(i).stderr_H : 0.0;
}

std::string to_string(EstimateMethod m) {
    return m == EstimateMethod::FinestA ? "finest-a" : "extrapolation";
}

PickandsTable estimate_chain(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                             std::vector<double> a_values, double S, const StreamBlock& streams,
                             const ChainOptions& opts) {
    limit::validate(spec, variant);
    if (opts.replicas == 0) throw DomainError("replicas must be positive");
    const ChainGeometry g = chain_geometry(std::move(a_values), S);
    const std::size_t R = g.a.size();
    if (opts.certify)
        for (std::size_t i = 0; i < R; ++i)
            limit::certify_truncation(spec, variant, g.a[i], g.K[i], opts.epsilon);

    const limit::LimitSampler sampler(spec, variant, g.a.back(), g.K_finest);
    const std::size_t coarse_stride = g.stride.front();

    auto chunks = map_chunks<ChunkCounts>(
        opts.replicas, opts.jobs, [&](std::uint64_t begin, std::uint64_t end) {
            ChunkCounts c{std::vector<std::uint64_t>(R, 0), std::vector<std::uint64_t>(R * R, 0)};
            limit::LimitCursor cur(sampler);
            std::vector<char> failed(R);
            for (std::uint64_t r = begin; r < end; ++r) {
                cur.start(streams.at(r));
                std::fill(failed.begin(), failed.end(), 0);
                for (std::size_t k = 1; k <= g.K_finest; ++k) {
                    if (cur.next() <= 0.0) continue;
                    for (std::size_t i = 0; i < R; ++i)
                        if (k % g.stride[i] == 0) failed[i] = 1;
                    if (k % coarse_stride == 0) break;
                }
                for (std::size_t i = 0; i < R; ++i) {
                    if (failed[i]) continue;
                    ++c.hits[i];
                    for (std::size_t j = 0; j < R; ++j)
                        if (!failed[j]) ++c.joint[i * R + j];
                }
            }
            return c;
        });

    std::vector<std::uint64_t> hits(R, 0), joint(R * R, 0);
    for (const auto& c : chunks) {
        for (std::size_t i = 0; i < R; ++i) hits[i] += c.hits[i];
        for (std::size_t i = 0; i < R * R; ++i) joint[i] += c.joint[i];
    }

    PickandsTable t;
    const double n = static_cast<double>(opts.replicas);
    for (std::size_t i = 0; i < R; ++i) {
        PickandsRow row;
        row.a = g.a[i];
        row.K = g.K[i];
        row.S = g.a[i] * static_cast<double>(g.K[i]);
        row.replicas = opts.replicas;
        row.hits = hits[i];
        row.p_hat = static_cast<double>(hits[i]) / n;
        row.H_hat = row.p_hat / row.a;
        row.stderr_H = std::sqrt(row.p_hat * (1.0 - row.p_hat) / n) / row.a;
        t.rows.push_back(row);
    }
    t.covariance.assign(R, std::vector<double>(R, 0.0));
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < R; ++j) {
            const double pij = static_cast<double>(joint[i * R + j]) / n;
            t.covariance[i][j] =
                (pij - t.rows[i].p_hat * t.rows[j].p_hat) / n / (t.rows[i].a * t.rows[j].a);
        }
    return t;
}

PickandsRow estimate_discrete_H(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                                double a, std::size_t K, const StreamBlock& streams,
                                const ChainOptions& opts) {
    if (K == 0) throw DomainError("K must be positive");
    if (opts.certify) limit::certify_truncation(spec, variant, a, K, opts.epsilon);
    ChainOptions inner = opts;
    inner.certify = false;
    auto t = estimate_chain(spec, variant, {a}, a * static_cast<double>(K) * (1.0 - 1e-12), streams, inner);
    return t.rows.front();
}

PickandsEstimate extrapolate_H(const PickandsTable& table, double exponent) {
    if (!(exponent > 0.0)) throw DomainError("extrapolation exponent must be positive");
    const std::size_t R = table.rows.size();
    {
        std::vector<double> as;
        for (const auto& r : table.rows) as.push_back(r.a);
        std::sort(as.begin(), as.end());
        if (std::unique(as.begin(), as.end()) - as.begin() < 3)
            throw InsufficientDataError("extrapolation needs at least 3 rows with distinct a");
    }
    bool weighted = true;
    for (const auto& r : table.rows) weighted = weighted && r.stderr_H > 0.0;

    Eigen::MatrixXd X(R, 2);
    Eigen::VectorXd y(R), w(R);
    for (std::size_t i = 0; i < R; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = std::pow(table.rows[i].a, exponent);
        y(i) = table.rows[i].H_hat;
        w(i) = weighted ? 1.0 / (table.rows[i].stderr_H * table.rows[i].stderr_H) : 1.0;
    }
    const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
    const Eigen::MatrixXd proj = (XtW * X).inverse() * XtW;  // 2 x R
    const Eigen::Vector2d beta = proj * y;

    Eigen::MatrixXd cov(R, R);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < R; ++j) cov(i, j) = table.cov(i, j);
    const double var0 = proj.row(0) * cov * proj.row(0).transpose();

    PickandsEstimate e;
    e.exponent = exponent;
    e.table = table;
    e.slope = beta(1);
    double worst = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
        const double resid = y(i) - (beta(0) + beta(1) * X(i, 1));
        const double se = table.rows[i].stderr_H;
        const double scaled = se > 0.0 ? std::abs(resid) / se
                                       : (std::abs(resid) > 1e-12 * (1.0 + std::abs(y(i)))
                                              ? std::numeric_limits<double>::infinity()
                                              : 0.0);
        worst = std::max(worst, scaled);
    }
    e.max_scaled_residual = worst;

    if (worst > 3.0 || !(beta(0) > 0.0)) {
        const auto finest = std::min_element(table.rows.begin(), table.rows.end(),
                                             [](const auto& l, const auto& r) { return l.a < r.a; });
        e.value = finest->H_hat;
        e.std_error = finest->stderr_H;
        e.method = EstimateMethod::FinestA;
    } else {
        e.value = beta(0);
        e.std_error = std::sqrt(std::max(var0, 0.0));
        e.method = EstimateMethod::Extrapolation;
    }
    return e;
}

double lower_bound_factor(const limit::EnsembleSpec& spec) {
    const double amin = spec.alpha_min();
    double f = 0.0;
    for (auto i : spec.active_set()) f = std::max(f, std::pow(spec[i].model.C(), 1.0 / amin));
    return f;
}

double lower_bound_H(const limit::EnsembleSpec& spec, double H_alpha_min) {
    if (!(H_alpha_min > 0.0)) throw DomainError("classical Pickands constant must be positive");
    return lower_bound_factor(spec) * H_alpha_min;
}

double certified_S(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                   const PipelineOptions& opts) {
    auto ok = [&](double S) {
        const ChainGeometry g = chain_geometry(opts.a_values, S);
        for (std::size_t i = 0; i < g.a.size(); ++i)
            if (limit::tail_truncation_bound(spec, variant, g.a[i], g.K[i]) > opts.epsilon * g.a[i])
                return false;
        return true;
    };
    if (!opts.auto_extend_S || ok(opts.S)) return opts.S;
    if (!(opts.S_step > 0.0)) throw DomainError("S_step must be positive");
    for (double S = opts.S + opts.S_step; S <= opts.S_max; S += opts.S_step)
        if (ok(S)) return S;
    std::ostringstream os;
    os << "no S <= " << opts.S_max << " certifies truncation at epsilon=" << opts.epsilon;
    throw FeasibilityError(os.str(), "raise S_max or relax epsilon");
}

PipelineResult run_pickands(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                            const PipelineOptions& opts, const StreamBlock& streams) {
    limit::validate(spec, variant);
    PipelineResult res;
    res.S_requested = opts.S;
    res.S_used = certified_S(spec, variant, opts);
    ChainOptions co;
    co.replicas = opts.replicas;
    co.epsilon = opts.epsilon;
    co.jobs = opts.jobs;
    const auto table = estimate_chain(spec, variant, opts.a_values, res.S_used, streams, co);
    const double exponent = opts.exponent.value_or(spec.prefix(limit::participating(spec, variant)).alpha_min() / 2.0);
    res.estimate = extrapolate_H(table, exponent);
    return res;
}

} // namespace conjlab::pickands
