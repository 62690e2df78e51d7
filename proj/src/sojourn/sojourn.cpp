#include "conjlab/sojourn/sojourn.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/parallel.hpp"
#include "conjlab/extremes/tail.hpp"
#include "conjlab/limit/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace conjlab::sojourn {

std::vector<double> SojournSet::values() const {
    std::vector<double> out;
    out.reserve(replicas);
    for (std::size_t c = 0; c < histogram.size(); ++c) out.insert(out.end(), histogram[c], value(c));
    return out;
}

Estimate SojournSet::mean() const {
    if (replicas == 0) throw InsufficientDataError("empty sojourn set");
    const double n = static_cast<double>(replicas);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < histogram.size(); ++c) {
        const double v = value(c), w = static_cast<double>(histogram[c]);
        s1 += w * v;
        s2 += w * v * v;
    }
    Estimate e;
    e.mean = s1 / n;
    e.n_replicas = replicas;
    const double var = replicas > 1 ? std::max(0.0, (s2 - n * e.mean * e.mean) / (n - 1.0)) : 0.0;
    e.std_error = std::sqrt(var / n);
    return e;
}

SojournGrid sojourn_grid(const limit::EnsembleSpec& spec, double t, double u, double a) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("horizon t must be positive");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("pitch a must be positive");
    if (!std::isfinite(u)) throw DomainError("level u must be finite");
    // q(u) is only defined for u > 0; below that the pitch is read in time units
    const double q = u > 0.0 ? extremes::extremal_scale(u, spec.alpha_min()) : 1.0;
    const double raw = std::ceil(t / (a * q) - 1e-9);
    if (raw > 1e8) throw DomainError("sojourn grid would exceed 1e8 points");
    SojournGrid g;
    g.points = static_cast<std::size_t>(std::max(1.0, raw));
    g.step = t / static_cast<double>(g.points);
    return g;
}

std::vector<std::uint32_t> sojourn_counts(const limit::EnsembleSpec& spec, const SojournGrid& grid, double u,
                                          const StreamBlock& streams, std::uint64_t first, std::uint64_t count,
                                          gauss::StationaryMethod method) {
    limit::validate(spec, limit::LimitVariant::standard());
    const std::size_t n = spec.n(), m = grid.points;
    std::vector<std::unique_ptr<gauss::StationarySampler>> samplers;
    for (std::size_t i = 0; i < n; ++i)
        samplers.push_back(std::make_unique<gauss::StationarySampler>(
            spec[i].model, gauss::GridSpec::with_step(grid.step, m), method));

    std::vector<std::uint32_t> out(count, 0);
    std::vector<double> path(m);
    std::vector<char> above(m);
    gauss::SamplerWorkspace ws;
    for (std::uint64_t r = 0; r < count; ++r) {
        const RandomStream replica = streams.at(first + r);
        std::fill(above.begin(), above.end(), char{1});
        bool any = true;
        for (std::size_t i = 0; i < n && any; ++i) {
            RandomStream s = replica.substream(static_cast<std::uint32_t>(i));
            samplers[i]->sample(s, path, ws);
            any = false;
            for (std::size_t k = 0; k < m; ++k) {
                above[k] = above[k] && path[k] > u;
                any = any || above[k];
            }
        }
        if (any) out[r] = static_cast<std::uint32_t>(std::count(above.begin(), above.end(), char{1}));
    }
    return out;
}

SojournSet mc_sojourn(const limit::EnsembleSpec& spec, double t, double u, double a, std::uint64_t replicas,
                      const StreamBlock& streams, unsigned jobs, gauss::StationaryMethod method) {
    if (replicas == 0) throw DomainError("replicas must be positive");
    const auto grid = sojourn_grid(spec, t, u, a);
    auto chunks = map_chunks<std::vector<std::uint64_t>>(replicas, jobs, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<std::uint64_t> hist(grid.points + 1, 0);
        for (auto c : sojourn_counts(spec, grid, u, streams, begin, end - begin, method)) ++hist[c];
        return hist;
    });
    SojournSet set;
    set.t = t;
    set.u = u;
    set.a = a;
    set.step = grid.step;
    set.points = grid.points;
    set.replicas = replicas;
    set.histogram.assign(grid.points + 1, 0);
    for (const auto& c : chunks)
        for (std::size_t k = 0; k < c.size(); ++k) set.histogram[k] += c[k];
    return set;
}

double berman_lhs(std::span<const double> samples, double x, double u, double alpha_min) {
    if (samples.empty()) throw InsufficientDataError("berman_lhs needs at least one sample");
    if (!(x >= 0.0)) throw DomainError("x must be non-negative");
    if (!(u > 0.0)) throw DomainError("level u must be positive");
    const double scale = std::pow(u, 2.0 / alpha_min);
    double num = 0.0, den = 0.0;
    for (double L : samples) {
        if (!(L >= 0.0)) throw DomainError("sojourn samples must be non-negative");
        const double R = scale * L;
        num += std::max(0.0, R - x);
        den += R;
    }
    if (den == 0.0) throw DomainError("all sojourn samples are zero; the normalizing mean vanishes");
    return num / den;
}

Estimate berman_lhs(const SojournSet& set, double x, double alpha_min) {
    if (set.replicas == 0) throw InsufficientDataError("berman_lhs needs at least one sample");
    if (!(x >= 0.0)) throw DomainError("x must be non-negative");
    if (!(set.u > 0.0)) throw DomainError("level u must be positive");
    const double scale = std::pow(set.u, 2.0 / alpha_min);
    const double n = static_cast<double>(set.replicas);
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < set.histogram.size(); ++c) {
        const double R = scale * set.value(c), w = static_cast<double>(set.histogram[c]);
        num += w * std::max(0.0, R - x);
        den += w * R;
    }
    if (den == 0.0) throw DomainError("all sojourn samples are zero; the normalizing mean vanishes");
    const double ratio = num / den, mean_R = den / n;
    // ratio of means: Var(A - ratio R) / (n mean(R)^2)
    double ss = 0.0;
    for (std::size_t c = 0; c < set.histogram.size(); ++c) {
        const double R = scale * set.value(c);
        const double d = std::max(0.0, R - x) - ratio * R;
        ss += static_cast<double>(set.histogram[c]) * d * d;
    }
    Estimate e;
    e.mean = ratio;
    e.n_replicas = set.replicas;
    e.std_error = set.replicas > 1 ? std::sqrt(ss / (n - 1.0) / n) / mean_R : 0.0;
    return e;
}

std::size_t certified_occupation_K(const limit::EnsembleSpec& spec, double a, double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    return limit::certified_K(spec, limit::LimitVariant::standard(), a, epsilon / a);
}

OccupationTail estimate_B(const limit::EnsembleSpec& spec, double a, std::size_t K, std::uint64_t replicas,
                          const StreamBlock& streams, std::span<const double> x_grid, double epsilon,
                          unsigned jobs) {
    if (replicas == 0) throw DomainError("replicas must be positive");
    if (K < 1) throw DomainError("K must be at least 1");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    for (double x : x_grid)
        if (!(x >= 0.0)) throw DomainError("x grid must be non-negative");
    const auto variant = limit::LimitVariant::standard();
    limit::certify_truncation(spec, variant, a, K, epsilon / a);

    const limit::LimitSampler sampler(spec, variant, a, K);
    // hist[c]: replicas whose path is positive at c of the points a k, k = 0..K-1
    auto chunks = map_chunks<std::vector<std::uint64_t>>(replicas, jobs, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<std::uint64_t> hist(K + 1, 0);
        std::vector<double> path(K);
        for (std::uint64_t r = begin; r < end; ++r) {
            sampler.sample(streams.at(r), path);
            const auto positive = std::count_if(path.begin(), path.end() - 1, [](double v) { return v > 0.0; });
            ++hist[1 + static_cast<std::size_t>(positive)];
        }
        return hist;
    });
    std::vector<std::uint64_t> hist(K + 1, 0);
    for (const auto& c : chunks)
        for (std::size_t k = 0; k <= K; ++k) hist[k] += c[k];

    OccupationTail out;
    out.a = a;
    out.K = K;
    out.truncation_bound = limit::tail_truncation_bound(spec, variant, a, K);
    out.x.assign(x_grid.begin(), x_grid.end());
    for (double x : x_grid) {
        std::uint64_t above = 0;
        for (std::size_t c = 0; c <= K; ++c)
            if (a * static_cast<double>(c) > x) above += hist[c];
        out.B.push_back(Estimate::binomial(above, replicas));
    }
    return out;
}

BermanReport berman_compare(const limit::EnsembleSpec& spec, std::span<const double> u_list,
                            std::span<const double> x_grid, const BermanOptions& opt, const StreamBlock& streams) {
    if (u_list.empty() || x_grid.empty()) throw DomainError("u list and x grid must be nonempty");
    for (double x : x_grid)
        if (!(x > 0.0)) throw DomainError("x grid must be positive (continuity points of B)");
    std::vector<double> us(u_list.begin(), u_list.end());
    std::sort(us.begin(), us.end());
    std::vector<double> ts{opt.t};
    if (opt.sensitivity_t) ts.push_back(*opt.sensitivity_t);

    BermanReport rep;
    const std::size_t K = certified_occupation_K(spec, opt.limit_a, opt.epsilon);
    rep.limit = estimate_B(spec, opt.limit_a, K, opt.limit_replicas, streams.job(0), x_grid, opt.epsilon, opt.jobs);

    const double amin = spec.alpha_min();
    std::uint64_t job = 1;
    for (double t : ts) {
        std::vector<std::vector<double>> diffs(x_grid.size());
        for (double u : us) {
            rep.runs.push_back(mc_sojourn(spec, t, u, opt.a, opt.replicas, streams.job(job++), opt.jobs));
            const auto& set = rep.runs.back();
            for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
                BermanRow row;
                row.t = t;
                row.u = u;
                row.x = x_grid[xi];
                row.lhs = berman_lhs(set, row.x, amin);
                row.B = rep.limit.B[xi];
                row.abs_diff = std::abs(row.lhs.mean - row.B.mean);
                row.diff_err = combined_stderr(row.lhs, row.B);
                diffs[xi].push_back(row.abs_diff);
                rep.rows.push_back(row);
            }
        }
        for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
            BermanTrend tr{t, x_grid[xi], true};
            for (std::size_t k = 1; k < diffs[xi].size(); ++k) tr.shrinking = tr.shrinking && diffs[xi][k] <= diffs[xi][k - 1];
            rep.trends.push_back(tr);
        }
    }
    return rep;
}

} // namespace conjlab::sojourn
