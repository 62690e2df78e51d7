#include "conjlab/extremes/tail.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/log.hpp"
#include "conjlab/core/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

namespace conjlab::extremes {

double extremal_scale(double u, double alpha_min) {
    if (!(u > 0.0)) throw DomainError("level u must be positive");
    return std::pow(u, -2.0 / alpha_min);
}

namespace {

using gauss::GridSpec;
using gauss::StationarySampler;

struct ProcessPlan {
    double threshold = 0.0;
    std::optional<limit::TimeChangeLaw> theta;
    std::unique_ptr<StationarySampler> fixed;                  // no time change
    std::map<double, std::unique_ptr<StationarySampler>> atoms; // discrete time change, by atom
};

} // namespace

TailResult mc_sup_tail(const TailQuery& q, const StreamBlock& streams, unsigned jobs) {
    limit::validate(q.spec, q.variant);
    if (!(q.T > 0.0) || !std::isfinite(q.T)) throw DomainError("horizon T must be positive");
    if (!(q.u > 0.0) || !std::isfinite(q.u)) throw DomainError("level u must be positive");
    if (!(q.a > 0.0)) throw DomainError("pitch a must be positive");
    if (q.replicas == 0) throw DomainError("replicas must be positive");
    if (q.halvings < 1 || q.halvings > 20) throw DomainError("halvings must lie in 1..20");

    const std::size_t n = q.spec.n();
    const bool order = q.variant.kind == limit::LimitVariant::Kind::OrderStat;
    const std::size_t need = order ? q.variant.j : n;
    const bool nonstandard = q.variant.kind == limit::LimitVariant::Kind::NonStandard;

    const double qu = extremal_scale(q.u, q.spec.alpha_min());
    const auto n_coarse = static_cast<std::size_t>(std::ceil(q.T / (q.a * qu) - 1e-9));
    const int L = q.halvings;
    const std::size_t n_fine = n_coarse << L;
    const double h = q.T / static_cast<double>(n_fine);
    const std::size_t m = n_fine + 1;

    std::vector<ProcessPlan> plans(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = q.spec[i];
        plans[i].threshold = nonstandard ? p.b * q.u : q.u;
        plans[i].theta = p.theta;
        if (!p.theta) {
            plans[i].fixed = std::make_unique<StationarySampler>(p.model, GridSpec::with_step(h, m), q.method);
        } else if (p.theta->kind() == limit::TimeChangeLaw::Kind::Discrete) {
            for (const auto& atom : p.theta->atoms())
                if (atom.value > 0.0 && !plans[i].atoms.count(atom.value))
                    plans[i].atoms.emplace(atom.value, std::make_unique<StationarySampler>(
                                                           p.model, GridSpec::with_step(atom.value * h, m), q.method));
        }
    }

    auto chunks = map_chunks<std::vector<std::uint64_t>>(
        q.replicas, jobs, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<std::uint64_t> hits(L + 1, 0);
            std::vector<double> path(m);
            std::vector<unsigned> count(m);
            gauss::SamplerWorkspace ws;
            for (std::uint64_t r = begin; r < end; ++r) {
                const RandomStream replica = streams.at(r);
                std::fill(count.begin(), count.end(), 0u);
                bool reachable = true;
                for (std::size_t i = 0; i < n && reachable; ++i) {
                    RandomStream s = replica.substream(static_cast<std::uint32_t>(i));
                    const auto& plan = plans[i];
                    if (!plan.theta) {
                        plan.fixed->sample(s, path, ws);
                    } else {
                        const double th = plan.theta->sample(s);
                        if (th == 0.0) {
                            std::fill(path.begin(), path.end(), s.normal());
                        } else if (auto it = plan.atoms.find(th); it != plan.atoms.end()) {
                            it->second->sample(s, path, ws);
                        } else {
                            StationarySampler(q.spec[i].model, GridSpec::with_step(th * h, m), q.method)
                                .sample(s, path, ws);
                        }
                    }
                    const std::size_t remaining = n - 1 - i;
                    reachable = false;
                    for (std::size_t k = 0; k < m; ++k) {
                        count[k] += path[k] > plan.threshold;
                        reachable = reachable || count[k] + remaining >= need;
                    }
                }
                if (!reachable) continue;
                int best = L + 1;
                for (std::size_t k = 0; k < m && best > 0; ++k) {
                    if (count[k] < need) continue;
                    const int level = k == 0 ? 0 : std::max(0, L - std::countr_zero(k));
                    best = std::min(best, level);
                }
                for (int l = best; l <= L; ++l) ++hits[l];
            }
            return hits;
        });

    std::vector<std::uint64_t> hits(L + 1, 0);
    for (const auto& c : chunks)
        for (int l = 0; l <= L; ++l) hits[l] += c[l];

    TailResult res;
    res.q = qu;
    auto& gate = res.gate;
    for (int l = 0; l <= L; ++l) {
        LevelEstimate le;
        le.a = q.a / static_cast<double>(std::size_t{1} << l);
        le.step = h * static_cast<double>(std::size_t{1} << (L - l));
        le.points = (n_coarse << l) + 1;
        le.estimate = Estimate::binomial(hits[l], q.replicas);
        gate.levels.push_back(le);
    }
    gate.selected = static_cast<std::size_t>(L);
    for (int l = 0; l < L; ++l) {
        const auto& c = gate.levels[l].estimate;
        const auto& f = gate.levels[l + 1].estimate;
        if (std::abs(f.mean - c.mean) < 2.0 * combined_stderr(c, f) || f.mean == c.mean) {
            gate.passed = true;
            gate.selected = static_cast<std::size_t>(l + 1);
            gate.coarse = c.mean;
            gate.fine = f.mean;
            break;
        }
    }
    std::ostringstream msg;
    if (gate.passed) {
        msg << "halving gate passed between a=" << gate.levels[gate.selected - 1].a
            << " and a=" << gate.levels[gate.selected].a;
    } else {
        gate.coarse = gate.levels[L - 1].estimate.mean;
        gate.fine = gate.levels[L].estimate.mean;
        msg << "discretization warning: halving gate failed down to a=" << gate.levels[L].a
            << " (u=" << q.u << "); reporting the finest level";
        log_warning(msg.str());
    }
    gate.message = msg.str();
    res.estimate = gate.levels[gate.selected].estimate;
    return res;
}

} // namespace conjlab::extremes
