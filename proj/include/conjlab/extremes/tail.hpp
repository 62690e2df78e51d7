#pragma once

#include "conjlab/core/estimate.hpp"
#include "conjlab/core/random.hpp"
#include "conjlab/gauss/samplers.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace conjlab::extremes {

/// Sup-tail query on [0, T]. The grid pitch is a q(u) with q(u) = u^(-2/alpha_min).
struct TailQuery {
    limit::EnsembleSpec spec;
    limit::LimitVariant variant = limit::LimitVariant::standard();
    double T = 1.0;
    double u = 2.0;
    double a = 0.25;
    std::uint64_t replicas = 100000;
    /// Number of pitch halvings simulated below a (finest pitch a / 2^halvings).
    int halvings = 5;
    gauss::StationaryMethod method = gauss::StationaryMethod::Auto;
};

double extremal_scale(double u, double alpha_min);

struct LevelEstimate {
    double a = 0.0;       ///< pitch in q(u) units
    double step = 0.0;    ///< grid step in time units
    std::size_t points = 0;
    Estimate estimate;
};

/// Halving gate: the first pair of consecutive levels whose estimates differ
/// by less than 2 combined standard errors passes, and the finer of the two is
/// reported. If no pair passes, the finest level is reported with a warning.
struct GateReport {
    bool passed = false;
    std::size_t selected = 0;
    double coarse = 0.0;  ///< estimate at the coarser level of the deciding pair
    double fine = 0.0;
    std::vector<LevelEstimate> levels;  ///< coarsest first
    std::string message;
};

struct TailResult {
    Estimate estimate;
    GateReport gate;
    double q = 0.0;
};

/// Fraction of replicas in which the grid maximum of the variant's statistic
/// exceeds u: min_i X_i (standard), min_i X_i(Theta_i t) (time-changed),
/// min_i X_i / b_i (non-standard) or the j-th largest X_i (order statistics,
/// using all n processes). All pitch levels are read from one simulation at
/// the finest pitch, so the levels are coupled and refinement can only raise
/// the estimate.
TailResult mc_sup_tail(const TailQuery& query, const StreamBlock& streams, unsigned jobs = 0);

} // namespace conjlab::extremes
