#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace conjlab::extremes {

/// Row-major sample matrix, one row per accepted replica, one column per time.
struct ExcursionSample {
    std::vector<double> times;   ///< in q(u) units
    std::vector<double> values;
    std::uint64_t attempted = 0;
    std::uint64_t accepted = 0;

    std::size_t columns() const { return times.size(); }
    std::size_t rows() const { return times.empty() ? 0 : values.size() / times.size(); }
    std::vector<double> column(std::size_t k) const;
};

/// Minimal accepted count required by the feasibility guard.
inline constexpr std::uint64_t kMinAccepted = 1000;

/// Draws of n u (min_i X_i(q(u) t_k) - u) given min_i X_i(0) > u, by rejection on
/// the time-0 values followed by exact Gaussian conditioning at the requested
/// times. Replicas are never split, so the accepted rows are a deterministic
/// function of (streams, replicas). Throws FeasibilityError when
/// replicas * Psi(u)^n < kMinAccepted.
ExcursionSample conditional_excursion_sample(const limit::EnsembleSpec& spec, double u,
                                             std::span<const double> times, std::uint64_t replicas,
                                             const StreamBlock& streams, unsigned jobs = 0);

/// Draws of n Z(t_k) from the limit process at arbitrary times.
ExcursionSample limit_excursion_sample(const limit::EnsembleSpec& spec, std::span<const double> times,
                                       std::uint64_t replicas, const StreamBlock& streams,
                                       unsigned jobs = 0);

/// Largest u for which `replicas` attempts meet the feasibility guard.
double max_feasible_level(std::size_t n, std::uint64_t replicas);

} // namespace conjlab::extremes
