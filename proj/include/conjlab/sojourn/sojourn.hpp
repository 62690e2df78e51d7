#pragma once

#include "conjlab/core/estimate.hpp"
#include "conjlab/core/random.hpp"
#include "conjlab/gauss/samplers.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace conjlab::sojourn {

/// Sojourn times L_t(u) of min_i X_i above u on [0, t], one per replica, kept
/// as a histogram over the number of grid points above the level. The grid is
/// s_k = k h, k = 0..N-1, with h = t / N and N = ceil(t / (a q(u))), so
/// L = h * count (left Riemann sum).
struct SojournSet {
    double t = 0.0;
    double u = 0.0;
    double a = 0.0;
    double step = 0.0;
    std::size_t points = 0;
    std::uint64_t replicas = 0;
    std::vector<std::uint64_t> histogram;  ///< histogram[c] = replicas with c points above u

    double value(std::size_t count) const { return step * static_cast<double>(count); }
    /// Per-replica values in nondecreasing order.
    std::vector<double> values() const;
    /// Sample mean of L with its standard error.
    Estimate mean() const;
};

/// Grid shared by every replica of a sojourn run.
struct SojournGrid {
    double step = 0.0;
    std::size_t points = 0;
};
SojournGrid sojourn_grid(const limit::EnsembleSpec& spec, double t, double u, double a);

/// Point counts above u for replicas first .. first+count-1, in replica order.
std::vector<std::uint32_t> sojourn_counts(const limit::EnsembleSpec& spec, const SojournGrid& grid,
                                          double u, const StreamBlock& streams, std::uint64_t first,
                                          std::uint64_t count,
                                          gauss::StationaryMethod method = gauss::StationaryMethod::Auto);

SojournSet mc_sojourn(const limit::EnsembleSpec& spec, double t, double u, double a, std::uint64_t replicas,
                      const StreamBlock& streams, unsigned jobs = 0,
                      gauss::StationaryMethod method = gauss::StationaryMethod::Auto);

/// mean((R - x)^+) / mean(R) with R = u^(2/alpha_min) L.
double berman_lhs(std::span<const double> samples, double x, double u, double alpha_min);

/// Same ratio from a histogram, with a delta-method standard error.
Estimate berman_lhs(const SojournSet& set, double x, double alpha_min);

/// Tail of the limit occupation time, one estimate per x.
struct OccupationTail {
    double a = 0.0;
    std::size_t K = 0;
    double truncation_bound = 0.0;
    std::vector<double> x;
    std::vector<Estimate> B;
};

/// Fraction of limit-process replicas whose occupation time
/// a * #{k = 0..K-1 : Z(a k) > 0} exceeds x. Refuses (FeasibilityError) when
/// the truncation bound beyond K exceeds `epsilon`.
OccupationTail estimate_B(const limit::EnsembleSpec& spec, double a, std::size_t K, std::uint64_t replicas,
                          const StreamBlock& streams, std::span<const double> x_grid, double epsilon = 1e-4,
                          unsigned jobs = 0);

/// Smallest K whose truncation bound is at most epsilon (absolute).
std::size_t certified_occupation_K(const limit::EnsembleSpec& spec, double a, double epsilon = 1e-4);

struct BermanOptions {
    double t = 1.0;
    std::optional<double> sensitivity_t = 0.5;
    double a = 1.0 / 16.0;        ///< sojourn grid pitch in q(u) units
    std::uint64_t replicas = 1000000;
    double limit_a = 1.0 / 16.0;
    std::uint64_t limit_replicas = 200000;
    double epsilon = 1e-4;
    unsigned jobs = 0;
};

struct BermanRow {
    double t = 0.0;
    double u = 0.0;
    double x = 0.0;
    Estimate lhs;
    Estimate B;
    double abs_diff = 0.0;
    double diff_err = 0.0;
};

struct BermanTrend {
    double t = 0.0;
    double x = 0.0;
    /// abs_diff is nonincreasing along the sorted u list.
    bool shrinking = false;
};

struct BermanReport {
    std::vector<BermanRow> rows;  ///< ordered by t, then u, then x
    std::vector<BermanTrend> trends;
    OccupationTail limit;
    std::vector<SojournSet> runs;  ///< one per (t, u)
};

BermanReport berman_compare(const limit::EnsembleSpec& spec, std::span<const double> u_list,
                            std::span<const double> x_grid, const BermanOptions& options,
                            const StreamBlock& streams);

} // namespace conjlab::sojourn
