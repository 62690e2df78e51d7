#include "conjlab/gauss/samplers.hpp"

#include "conjlab/core/error.hpp"

#include <cmath>

namespace conjlab::gauss {

namespace {

bool markov_exact(const CorrelationModel& m) {
    return m.family() == CorrelationFamily::PoweredExponential && m.alpha() == 1.0;
}

} // namespace

StationarySampler::StationarySampler(const CorrelationModel& model, const GridSpec& grid,
                                     StationaryMethod method)
    : model_(model), grid_(grid) {
    const bool use_markov =
        method == StationaryMethod::Markov || (method == StationaryMethod::Auto && markov_exact(model));
    if (use_markov) {
        if (!markov_exact(model))
            throw ConfigError("Markov sampling is only exact for powered_exponential with alpha = 1");
        rho_ = model(grid.step());
        innovation_sd_ = std::sqrt(model.one_minus(grid.step()) * (1.0 + rho_));
        return;
    }
    const double step = grid.step();
    auto acov = [&model, step](std::size_t lag) { return model(static_cast<double>(lag) * step); };
    FactorizationPolicy policy = FactorizationPolicy::Auto;
    if (method == StationaryMethod::Circulant) policy = FactorizationPolicy::CirculantOnly;
    if (method == StationaryMethod::Cholesky) policy = FactorizationPolicy::CholeskyOnly;
    toeplitz_.emplace(acov, grid.m(), policy);
}

std::optional<Factorization> StationarySampler::factorization() const {
    if (!toeplitz_) return std::nullopt;
    return toeplitz_->method();
}

void StationarySampler::sample(RandomStream& stream, std::span<double> out,
                               SamplerWorkspace& ws) const {
    if (out.size() != grid_.m()) throw ShapeError("StationarySampler: output has wrong length");
    if (toeplitz_) {
        toeplitz_->sample(stream, out, ws);
        return;
    }
    double x = stream.normal();
    out[0] = x;
    for (std::size_t k = 1; k < out.size(); ++k) {
        x = rho_ * x + innovation_sd_ * stream.normal();
        out[k] = x;
    }
}

SamplePath StationarySampler::sample(RandomStream& stream) const {
    SamplePath p{grid_, std::vector<double>(grid_.m())};
    SamplerWorkspace ws;
    sample(stream, p.values, ws);
    return p;
}

double fgn_autocovariance(double alpha, double step, std::size_t lag) {
    const double k = static_cast<double>(lag);
    const double scale = 0.5 * std::pow(step, alpha);
    if (lag == 0) return 2.0 * scale;
    return scale * (std::pow(k + 1.0, alpha) - 2.0 * std::pow(k, alpha) + std::pow(k - 1.0, alpha));
}

FbmSampler::FbmSampler(double alpha, const GridSpec& grid) : alpha_(alpha), grid_(grid) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("fBm exponent alpha must lie in (0,2]");
    increment_sd_ = std::pow(grid.step(), 0.5 * alpha);
    if (alpha == 1.0) {
        kind_ = Kind::White;
    } else if (alpha == 2.0) {
        kind_ = Kind::Line;
    } else {
        kind_ = Kind::Noise;
        const double step = grid.step();
        noise_.emplace([alpha, step](std::size_t lag) { return fgn_autocovariance(alpha, step, lag); },
                       grid.m() - 1);
    }
}

void FbmSampler::sample(RandomStream& stream, std::span<double> out, SamplerWorkspace& ws) const {
    if (out.size() != grid_.m()) throw ShapeError("FbmSampler: output has wrong length");
    out[0] = 0.0;
    switch (kind_) {
    case Kind::White: {
        double b = 0.0;
        for (std::size_t k = 1; k < out.size(); ++k) {
            b += increment_sd_ * stream.normal();
            out[k] = b;
        }
        return;
    }
    case Kind::Line: {
        // Hurst index 1: B(t) = t N.
        const double slope = stream.normal();
        for (std::size_t k = 1; k < out.size(); ++k) out[k] = grid_.time(k) * slope;
        return;
    }
    case Kind::Noise: {
        noise_->sample(stream, out.subspan(1), ws);
        for (std::size_t k = 1; k < out.size(); ++k) out[k] += out[k - 1];
        return;
    }
    }
}

SamplePath FbmSampler::sample(RandomStream& stream) const {
    SamplePath p{grid_, std::vector<double>(grid_.m())};
    SamplerWorkspace ws;
    sample(stream, p.values, ws);
    return p;
}

SamplePath sample_stationary_gp(const CorrelationModel& model, const GridSpec& grid,
                                RandomStream& stream) {
    return StationarySampler(model, grid).sample(stream);
}

SamplePath sample_fbm(double alpha, const GridSpec& grid, RandomStream& stream) {
    return FbmSampler(alpha, grid).sample(stream);
}

} // namespace conjlab::gauss
