#pragma once

#include "conjlab/core/estimate.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <map>
#include <string>

namespace conjlab::extremes {

enum class FormulaTag { Conjunction, ClassicalPickands, OrderStatistic, NonStandard, TimeChanged };
std::string to_string(FormulaTag tag);

/// A constant that enters an asymptotic formula, with its Monte Carlo error.
struct ConstantInput {
    double value = 0.0;
    double std_error = 0.0;
};

struct AsymptoticValue {
    double value = 0.0;
    /// Propagated from the constant's standard error (the formulas are linear in it).
    double std_error = 0.0;
    FormulaTag tag = FormulaTag::Conjunction;
    std::map<std::string, double> inputs;
};

/// H T u^(2/alpha_min) exp(-n u^2/2) / ((2 pi)^(n/2) u^n).
AsymptoticValue asymptotic_conjunction(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H);

/// T C^(1/alpha) H_alpha u^(2/alpha) Psi(u) for a single process.
AsymptoticValue asymptotic_classical(const gauss::CorrelationModel& model, double T, double u,
                                     ConstantInput H_alpha);

/// H_{alpha,j} T binom(n, j) u^(2/alpha) Psi(u)^j.
AsymptoticValue asymptotic_order_stat(std::size_t n, std::size_t j, double alpha, double T, double u,
                                      ConstantInput H_j);

/// H~ T u^(2/alpha_min) prod_i Psi(b_i u).
AsymptoticValue asymptotic_nonstandard(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H_tilde);

/// H* T u^(2/alpha_min) Psi(u)^n. Every process needs a time-change law.
AsymptoticValue asymptotic_timechanged(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H_star);

struct RatioReport {
    double ratio = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double ci_level = 0.95;
};

/// empirical / asymptotic with first-order error propagation from both inputs.
RatioReport ratio_diagnostic(const Estimate& empirical, const AsymptoticValue& asymptotic);

} // namespace conjlab::extremes
