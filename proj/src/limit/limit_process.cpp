#include "conjlab/limit/limit_process.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace conjlab::limit {

LimitSampler::LimitSampler(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                           std::size_t K)
    : spec_(spec), variant_(variant), a_(a), K_(K) {
    validate(spec, variant);
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("grid pitch a must be positive");
    if (K == 0) throw DomainError("K must be positive");

    const std::size_t used = participating(spec, variant);
    const bool nonstandard = variant.kind == LimitVariant::Kind::NonStandard;
    for (std::size_t i = 0; i < used; ++i) {
        const auto& p = spec[i];
        Component c;
        c.alpha = p.model.alpha();
        c.theta = p.theta;
        c.weight = nonstandard ? 1.0 / (p.b * p.b) : 1.0;
        if (spec.active(i)) {
            c.scale = std::numbers::sqrt2 / (nonstandard ? p.b : 1.0);
            c.step = std::pow(p.model.C(), 1.0 / c.alpha) * a;
            c.increment_sd = std::pow(c.step, 0.5 * c.alpha);
            c.drift.resize(K);
            for (std::size_t k = 1; k <= K; ++k)
                c.drift[k - 1] = p.model.C() * std::pow(a * static_cast<double>(k), c.alpha);
            if (c.alpha == 1.0) {
                c.kind = PathKind::White;
            } else if (c.alpha == 2.0) {
                c.kind = PathKind::Line;
            } else {
                c.kind = PathKind::General;
                c.fbm.emplace(c.alpha, gauss::GridSpec::with_step(c.step, K + 1));
            }
        }
        comps_.push_back(std::move(c));
    }
}

void LimitSampler::sample(const RandomStream& replica, std::span<double> out) const {
    if (out.size() != K_) throw ShapeError("limit path output must have K entries");
    LimitCursor cur(*this);
    cur.start(replica);
    for (auto& v : out) v = cur.next();
}

LimitCursor::LimitCursor(const LimitSampler& sampler)
    : sampler_(&sampler), states_(sampler.comps_.size()) {
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (sampler.comps_[i].kind == LimitSampler::PathKind::General)
            states_[i].path.resize(sampler.K_ + 1);
}

void LimitCursor::start(const RandomStream& replica) {
    k_ = 0;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const auto& c = sampler_->comps_[i];
        auto& s = states_[i];
        s.stream = replica.substream(static_cast<std::uint32_t>(i));
        s.e_term = c.weight * s.stream.exponential();
        if (c.theta) {
            const double th = c.theta->sample(s.stream);
            s.theta_scale = std::pow(th, 0.5 * c.alpha);
            s.theta_drift = std::pow(th, c.alpha);
        } else {
            s.theta_scale = 1.0;
            s.theta_drift = 1.0;
        }
        s.level = 0.0;
        switch (c.kind) {
        case LimitSampler::PathKind::Line: s.slope = s.stream.normal(); break;
        case LimitSampler::PathKind::General: c.fbm->sample(s.stream, s.path, ws_); break;
        default: break;
        }
    }
}

double LimitCursor::next() {
    ++k_;
    if (k_ > sampler_->K_) throw DomainError("LimitCursor: ran past K");
    double z = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const auto& c = sampler_->comps_[i];
        auto& s = states_[i];
        double b = 0.0;
        switch (c.kind) {
        case LimitSampler::PathKind::Constant:
            z = std::min(z, s.e_term);
            continue;
        case LimitSampler::PathKind::White:
            s.level += c.increment_sd * s.stream.normal();
            b = s.level;
            break;
        case LimitSampler::PathKind::Line:
            b = static_cast<double>(k_) * c.step * s.slope;
            break;
        case LimitSampler::PathKind::General:
            b = s.path[k_];
            break;
        }
        z = std::min(z, c.scale * s.theta_scale * b - c.drift[k_ - 1] * s.theta_drift + s.e_term);
    }
    return z;
}

std::vector<double> sample_limit_path(const EnsembleSpec& spec, const LimitVariant& variant,
                                      double a, std::size_t K, const RandomStream& stream) {
    std::vector<double> out(K);
    LimitSampler(spec, variant, a, K).sample(stream, out);
    return out;
}

double occupation_time(std::span<const double> path, double a) {
    const auto positive = std::count_if(path.begin(), path.end(), [](double v) { return v > 0.0; });
    return a * static_cast<double>(positive);
}

double single_time_exceedance(const ProcessSpec& p, double t) {
    const double C = p.model.C(), alpha = p.model.alpha(), b = p.b;
    auto at = [&](double theta) {
        const double v = C * std::pow(theta * t, alpha);
        return 2.0 * normal_survival(b * std::sqrt(0.5 * v));
    };
    if (p.theta) return p.theta->expect_nonincreasing_upper(at);
    return at(1.0);
}

double tail_truncation_bound(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                             std::size_t K) {
    validate(spec, variant);
    if (!(a > 0.0)) throw DomainError("grid pitch a must be positive");
    const std::size_t used = participating(spec, variant);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < used; ++i)
        if (spec.active(i)) active.push_back(i);

    auto term = [&](double k) {
        double m = 1.0;
        for (auto i : active) m = std::min(m, single_time_exceedance(spec[i], a * k));
        return m;
    };

    double sum = 0.0;
    double k = static_cast<double>(K) + 1.0;
    const double exact_end = static_cast<double>(K) + 4096.0;
    for (; k <= exact_end; k += 1.0) {
        const double v = term(k);
        if (v == 0.0) return sum;
        sum += v;
    }
    // Terms decrease in k, so the block [k, 2k) contributes at most k * term(k).
    for (int d = 0; d < 64; ++d, k *= 2.0) {
        const double block = k * term(k);
        sum += block;
        if (block < 1e-300 || block < 1e-17 * sum) return sum;
    }
    return std::numeric_limits<double>::infinity();
}

std::size_t certified_K(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                        double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("certification epsilon must be positive");
    const double target = epsilon * a;
    std::size_t hi = 1;
    while (tail_truncation_bound(spec, variant, a, hi) > target) {
        if (hi > (std::size_t{1} << 40))
            throw FeasibilityError("truncation cannot be certified for this ensemble",
                                   "the drift bound does not decay (time change with mass near 0?); "
                                   "bound the time change away from zero or relax epsilon");
        hi *= 2;
    }
    std::size_t lo = hi / 2;  // bound(lo) > target unless lo == 0
    if (lo == 0) return hi;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (tail_truncation_bound(spec, variant, a, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

void certify_truncation(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                        std::size_t K, double epsilon) {
    const double bound = tail_truncation_bound(spec, variant, a, K);
    if (bound <= epsilon * a) return;
    std::ostringstream what;
    what << "truncation at K=" << K << " (S=" << a * static_cast<double>(K) << ") is not certified: bound "
         << bound << " exceeds epsilon*a=" << epsilon * a;
    std::ostringstream advice;
    try {
        const std::size_t k = certified_K(spec, variant, a, epsilon);
        advice << "use K >= " << k << " (S >= " << a * static_cast<double>(k) << ")";
    } catch (const FeasibilityError& e) {
        advice << e.advice();
    }
    throw FeasibilityError(what.str(), advice.str());
}

} // namespace conjlab::limit
