#include "conjlab/extremes/asymptotics.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/special.hpp"

#include <cmath>
#include <numbers>

namespace conjlab::extremes {

std::string to_string(FormulaTag tag) {
    switch (tag) {
    case FormulaTag::Conjunction: return "conjunction";
    case FormulaTag::ClassicalPickands: return "classical";
    case FormulaTag::OrderStatistic: return "order_statistic";
    case FormulaTag::NonStandard: return "non_standard";
    case FormulaTag::TimeChanged: return "time_changed";
    }
    return "?";
}

namespace {

void check_common(double T, double u, const ConstantInput& H) {
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be non-negative");
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("level u must be positive");
    if (!(H.value >= 0.0) || !(H.std_error >= 0.0)) throw DomainError("constant and its stderr must be non-negative");
}

AsymptoticValue make(double factor, const ConstantInput& H, FormulaTag tag, double T, double u) {
    AsymptoticValue v;
    v.value = H.value * factor;
    v.std_error = H.std_error * factor;
    v.tag = tag;
    v.inputs = {{"T", T}, {"u", u}, {"H", H.value}, {"H_stderr", H.std_error}};
    return v;
}

} // namespace

AsymptoticValue asymptotic_conjunction(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H) {
    check_common(T, u, H);
    const double n = static_cast<double>(spec.n());
    const double amin = spec.alpha_min();
    const double factor = T * std::pow(u, 2.0 / amin) *
                          std::exp(-0.5 * n * u * u - 0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(u));
    auto v = make(factor, H, FormulaTag::Conjunction, T, u);
    v.inputs["n"] = n;
    v.inputs["alpha_min"] = amin;
    return v;
}

AsymptoticValue asymptotic_classical(const gauss::CorrelationModel& model, double T, double u,
                                     ConstantInput H_alpha) {
    check_common(T, u, H_alpha);
    const double alpha = model.alpha();
    const double factor = T * std::pow(model.C(), 1.0 / alpha) * std::pow(u, 2.0 / alpha) * normal_survival(u);
    auto v = make(factor, H_alpha, FormulaTag::ClassicalPickands, T, u);
    v.inputs["alpha"] = alpha;
    v.inputs["C"] = model.C();
    return v;
}

AsymptoticValue asymptotic_order_stat(std::size_t n, std::size_t j, double alpha, double T, double u,
                                      ConstantInput H_j) {
    check_common(T, u, H_j);
    if (j < 1 || j > n) throw DomainError("order statistic index j must lie in 1..n");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0,2]");
    const double binom = std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)));
    const double factor = T * binom * std::pow(u, 2.0 / alpha) * std::pow(normal_survival(u), static_cast<double>(j));
    auto v = make(factor, H_j, FormulaTag::OrderStatistic, T, u);
    v.inputs["n"] = static_cast<double>(n);
    v.inputs["j"] = static_cast<double>(j);
    v.inputs["alpha"] = alpha;
    return v;
}

AsymptoticValue asymptotic_nonstandard(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H_tilde) {
    check_common(T, u, H_tilde);
    double prod = 1.0;
    for (const auto& p : spec.processes()) prod *= normal_survival(p.b * u);
    const double factor = T * std::pow(u, 2.0 / spec.alpha_min()) * prod;
    auto v = make(factor, H_tilde, FormulaTag::NonStandard, T, u);
    v.inputs["n"] = static_cast<double>(spec.n());
    v.inputs["alpha_min"] = spec.alpha_min();
    return v;
}

AsymptoticValue asymptotic_timechanged(const limit::EnsembleSpec& spec, double T, double u,
                                       ConstantInput H_star) {
    for (std::size_t i = 0; i < spec.n(); ++i)
        if (!spec[i].theta)
            throw ConfigError("time-changed asymptotics need a time-change law for every process (missing for process " +
                              std::to_string(i + 1) + ")");
    check_common(T, u, H_star);
    const double n = static_cast<double>(spec.n());
    const double factor = T * std::pow(u, 2.0 / spec.alpha_min()) * std::pow(normal_survival(u), n);
    auto v = make(factor, H_star, FormulaTag::TimeChanged, T, u);
    v.inputs["n"] = n;
    v.inputs["alpha_min"] = spec.alpha_min();
    return v;
}

RatioReport ratio_diagnostic(const Estimate& empirical, const AsymptoticValue& asymptotic) {
    if (!(asymptotic.value > 0.0)) throw DomainError("ratio diagnostic needs a positive asymptotic value");
    RatioReport r;
    r.ci_level = empirical.ci_level;
    r.ratio = empirical.mean / asymptotic.value;
    const double rel_asym = asymptotic.std_error / asymptotic.value;
    r.std_error = std::hypot(empirical.std_error / asymptotic.value, r.ratio * rel_asym);
    const double z = two_sided_z(r.ci_level);
    r.ci_lo = r.ratio - z * r.std_error;
    r.ci_hi = r.ratio + z * r.std_error;
    return r;
}

} // namespace conjlab::extremes
