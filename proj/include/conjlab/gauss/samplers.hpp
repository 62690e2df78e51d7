#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/gauss/correlation.hpp"
#include "conjlab/gauss/grid.hpp"
#include "conjlab/gauss/toeplitz.hpp"

#include <optional>
#include <span>

namespace conjlab::gauss {

enum class StationaryMethod {
    Auto,       ///< Markov recursion when exact, else circulant embedding with Cholesky fallback
    Circulant,  ///< circulant embedding only
    Cholesky,   ///< dense Cholesky only
    Markov,     ///< AR(1) recursion; only exact for PoweredExponential with alpha = 1
};

/// Unit-variance stationary Gaussian process on a uniform grid.
class StationarySampler {
public:
    StationarySampler(const CorrelationModel& model, const GridSpec& grid,
                      StationaryMethod method = StationaryMethod::Auto);

    const GridSpec& grid() const { return grid_; }
    const CorrelationModel& model() const { return model_; }
    /// True when paths come from the exact AR(1) recursion.
    bool markov() const { return !toeplitz_.has_value(); }
    std::optional<Factorization> factorization() const;

    void sample(RandomStream& stream, std::span<double> out, SamplerWorkspace& ws) const;
    SamplePath sample(RandomStream& stream) const;

private:
    CorrelationModel model_;
    GridSpec grid_;
    double rho_ = 0.0;
    double innovation_sd_ = 0.0;
    std::optional<ToeplitzSampler> toeplitz_;
};

/// Standard fractional Brownian motion B_alpha with Cov = (t^a + s^a - |t-s|^a)/2
/// (Hurst index alpha/2), B(0) = 0, sampled as the cumulative sum of exactly
/// simulated fractional Gaussian noise.
class FbmSampler {
public:
    FbmSampler(double alpha, const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    double alpha() const { return alpha_; }

    void sample(RandomStream& stream, std::span<double> out, SamplerWorkspace& ws) const;
    SamplePath sample(RandomStream& stream) const;

private:
    enum class Kind { White, Line, Noise };

    double alpha_;
    GridSpec grid_;
    Kind kind_;
    double increment_sd_;
    std::optional<ToeplitzSampler> noise_;
};

/// Autocovariance of fractional Gaussian noise with spacing `step`.
double fgn_autocovariance(double alpha, double step, std::size_t lag);

SamplePath sample_stationary_gp(const CorrelationModel& model, const GridSpec& grid,
                                RandomStream& stream);
SamplePath sample_fbm(double alpha, const GridSpec& grid, RandomStream& stream);

} // namespace conjlab::gauss
