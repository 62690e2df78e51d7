#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conjlab::pickands {

struct PickandsRow {
    double a = 0.0;
    double S = 0.0;          ///< K a
    std::size_t K = 0;
    std::uint64_t replicas = 0;
    std::uint64_t hits = 0;  ///< replicas with max_k Z(a k) <= 0
    double p_hat = 0.0;
    double H_hat = 0.0;      ///< p_hat / a
    double stderr_H = 0.0;   ///< sqrt(p_hat (1 - p_hat) / replicas) / a
};

/// Rows ordered by decreasing a. When the rows share replicas (common random
/// numbers) `covariance` holds the joint covariance of the H_hat values;
/// otherwise it is empty and rows are treated as independent.
struct PickandsTable {
    std::vector<PickandsRow> rows;
    std::vector<std::vector<double>> covariance;

    double cov(std::size_t i, std::size_t j) const;
};

enum class EstimateMethod { FinestA, Extrapolation };
std::string to_string(EstimateMethod m);

struct PickandsEstimate {
    double value = 0.0;
    double std_error = 0.0;
    EstimateMethod method = EstimateMethod::Extrapolation;
    double exponent = 1.0;        ///< fit abscissa is a^exponent
    double slope = 0.0;
    double max_scaled_residual = 0.0;  ///< max |residual| / stderr over rows
    PickandsTable table;
};

struct ChainOptions {
    std::uint64_t replicas = 1'000'000;
    double epsilon = 1e-6;
    unsigned jobs = 0;
    bool certify = true;
};

/// One row: fraction of replicas with max_{1<=k<=K} Z(a k) <= 0. Refuses
/// (FeasibilityError with advised K) unless the truncation at K is certified.
PickandsRow estimate_discrete_H(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                                double a, std::size_t K, const StreamBlock& streams,
                                const ChainOptions& opts = {});

/// Rows for a dyadic chain of pitches sharing the same replicas: every replica
/// is simulated once at the finest pitch and the coarser rows read every 2nd,
/// 4th, ... point. All rows cover [0, S_eff], S_eff >= S.
PickandsTable estimate_chain(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                             std::vector<double> a_values, double S, const StreamBlock& streams,
                             const ChainOptions& opts = {});

/// Weighted least-squares fit of H_hat against a^exponent; the intercept is the
/// estimate. Falls back to the finest-a row when some row deviates from the fit
/// by more than 3 of its standard errors. Throws InsufficientDataError for
/// fewer than 3 rows with distinct a.
PickandsEstimate extrapolate_H(const PickandsTable& table, double exponent = 1.0);

/// max over active i of C_i^(1/alpha_min) times the classical constant for alpha_min.
double lower_bound_factor(const limit::EnsembleSpec& spec);
double lower_bound_H(const limit::EnsembleSpec& spec, double H_alpha_min);

struct PipelineOptions {
    std::vector<double> a_values{0.2, 0.1, 0.05};
    double S = 20.0;
    std::uint64_t replicas = 1'000'000;
    double epsilon = 1e-6;
    bool auto_extend_S = true;
    double S_step = 5.0;
    double S_max = 2000.0;
    std::optional<double> exponent;  ///< default alpha_min / 2
    unsigned jobs = 0;
};

struct PipelineResult {
    PickandsEstimate estimate;
    double S_requested = 0.0;
    double S_used = 0.0;
};

/// Smallest S >= opts.S (in steps of S_step when auto-extending) at which every
/// row of the chain is certified.
double certified_S(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                   const PipelineOptions& opts);

PipelineResult run_pickands(const limit::EnsembleSpec& spec, const limit::LimitVariant& variant,
                            const PipelineOptions& opts, const StreamBlock& streams);

} // namespace conjlab::pickands
