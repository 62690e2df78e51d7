#include "conjlab/extremes/conditional.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/linalg.hpp"
#include "conjlab/core/parallel.hpp"
#include "conjlab/core/special.hpp"
#include "conjlab/extremes/tail.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <iomanip>
#include <sstream>

namespace conjlab::extremes {

std::vector<double> ExcursionSample::column(std::size_t k) const {
    if (k >= columns()) throw DomainError("column index out of range");
    std::vector<double> out;
    out.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) out.push_back(values[r * columns() + k]);
    return out;
}

double max_feasible_level(std::size_t n, std::uint64_t replicas) {
    if (n == 0) throw DomainError("ensemble must be nonempty");
    const double target = std::log(static_cast<double>(kMinAccepted) / static_cast<double>(replicas)) / n;
    if (target >= std::log(0.5)) return 0.0;
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::log(normal_survival(mid)) >= target ? lo : hi) = mid;
    }
    return lo;
}

namespace {

void check_times(std::span<const double> times) {
    if (times.empty()) throw DomainError("at least one time is required");
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("times must be finite and non-negative");
}

using Rows = std::vector<double>;

ExcursionSample gather(std::span<const double> times, std::uint64_t replicas, std::vector<Rows>&& chunks) {
    ExcursionSample out;
    out.times.assign(times.begin(), times.end());
    out.attempted = replicas;
    for (auto& c : chunks) out.values.insert(out.values.end(), c.begin(), c.end());
    out.accepted = out.rows();
    return out;
}

} // namespace

ExcursionSample conditional_excursion_sample(const limit::EnsembleSpec& spec, double u,
                                             std::span<const double> times, std::uint64_t replicas,
                                             const StreamBlock& streams, unsigned jobs) {
    limit::validate(spec, limit::LimitVariant::standard());
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("level u must be positive");
    check_times(times);
    const std::size_t n = spec.n();
    const std::size_t d = times.size();

    const double predicted = static_cast<double>(replicas) * std::pow(normal_survival(u), static_cast<double>(n));
    if (predicted < static_cast<double>(kMinAccepted)) {
        std::ostringstream what, advice;
        what << "rejection sampling at u=" << u << " with " << replicas << " replicas is predicted to accept "
             << predicted << " samples (< " << kMinAccepted << ")";
        advice << "lower u to at most " << max_feasible_level(n, replicas) << " or raise replicas to at least "
               << std::fixed << std::setprecision(0)
               << std::ceil(kMinAccepted / std::pow(normal_survival(u), static_cast<double>(n)));
        throw FeasibilityError(what.str(), advice.str());
    }

    const double q = extremal_scale(u, spec.alpha_min());
    struct Conditioner {
        Eigen::VectorXd mean_weight;  // r(q t_k)
        Eigen::MatrixXd factor;       // of the covariance given X(0)
    };
    std::vector<Conditioner> cond(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& model = spec[i].model;
        Eigen::VectorXd r0(d);
        Eigen::MatrixXd cov(d, d);
        for (std::size_t k = 0; k < d; ++k) r0[k] = model(q * times[k]);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l)
                cov(k, l) = model(q * std::abs(times[k] - times[l])) - r0[k] * r0[l];
        cond[i] = {r0, psd_factor(cov)};
    }

    const double scale = static_cast<double>(n) * u;
    auto chunks = map_chunks<Rows>(replicas, jobs, [&](std::uint64_t begin, std::uint64_t end) {
        Rows rows;
        Eigen::VectorXd z(d), x(d), y(d);
        for (std::uint64_t r = begin; r < end; ++r) {
            const RandomStream replica = streams.at(r);
            bool accepted = true;
            y.setConstant(std::numeric_limits<double>::infinity());
            for (std::size_t i = 0; i < n && accepted; ++i) {
                RandomStream s = replica.substream(static_cast<std::uint32_t>(i));
                const double x0 = s.normal();
                if (!(x0 > u)) {
                    accepted = false;
                    break;
                }
                for (std::size_t k = 0; k < d; ++k) z[k] = s.normal();
                x.noalias() = cond[i].factor * z;
                x += x0 * cond[i].mean_weight;
                y = y.cwiseMin(x);
            }
            if (!accepted) continue;
            for (std::size_t k = 0; k < d; ++k) rows.push_back(scale * (y[k] - u));
        }
        return rows;
    });
    return gather(times, replicas, std::move(chunks));
}

ExcursionSample limit_excursion_sample(const limit::EnsembleSpec& spec, std::span<const double> times,
                                       std::uint64_t replicas, const StreamBlock& streams, unsigned jobs) {
    limit::validate(spec, limit::LimitVariant::standard());
    check_times(times);
    if (replicas == 0) throw DomainError("replicas must be positive");
    const std::size_t n = spec.n();
    const std::size_t d = times.size();

    struct Component {
        bool active = false;
        Eigen::VectorXd drift;
        Eigen::MatrixXd factor;  // of sqrt2 B(c t_k)
    };
    std::vector<Component> comps(n);
    for (std::size_t i = 0; i < n; ++i) {
        comps[i].active = spec.active(i);
        if (!comps[i].active) continue;
        const double alpha = spec[i].model.alpha();
        const double C = spec[i].model.C();
        const double c = std::pow(C, 1.0 / alpha);
        comps[i].drift.resize(d);
        Eigen::MatrixXd cov(d, d);
        for (std::size_t k = 0; k < d; ++k) {
            comps[i].drift[k] = C * std::pow(times[k], alpha);
            for (std::size_t l = 0; l < d; ++l) {
                const double s = c * times[k], t = c * times[l];
                cov(k, l) = std::pow(s, alpha) + std::pow(t, alpha) - std::pow(std::abs(s - t), alpha);
            }
        }
        comps[i].factor = psd_factor(cov);
    }

    const double scale = static_cast<double>(n);
    auto chunks = map_chunks<Rows>(replicas, jobs, [&](std::uint64_t begin, std::uint64_t end) {
        Rows rows;
        rows.reserve((end - begin) * d);
        Eigen::VectorXd z(d), x(d), y(d);
        for (std::uint64_t r = begin; r < end; ++r) {
            const RandomStream replica = streams.at(r);
            y.setConstant(std::numeric_limits<double>::infinity());
            for (std::size_t i = 0; i < n; ++i) {
                RandomStream s = replica.substream(static_cast<std::uint32_t>(i));
                const double e = s.exponential();
                if (!comps[i].active) {
                    y = y.cwiseMin(e);
                    continue;
                }
                for (std::size_t k = 0; k < d; ++k) z[k] = s.normal();
                x.noalias() = comps[i].factor * z;
                x -= comps[i].drift;
                x.array() += e;
                y = y.cwiseMin(x);
            }
            for (std::size_t k = 0; k < d; ++k) rows.push_back(scale * y[k]);
        }
        return rows;
    });
    return gather(times, replicas, std::move(chunks));
}

} // namespace conjlab::extremes
