#pragma once

#include <string>

namespace conjlab::gauss {

enum class CorrelationFamily { PoweredExponential, GeneralizedCauchy };

std::string to_string(CorrelationFamily f);
CorrelationFamily correlation_family_from_string(const std::string& name);

/// Stationary correlation r(t) with local behaviour r(t) = 1 - C|t|^alpha + o(|t|^alpha).
///
///   PoweredExponential: r(t) = exp(-C |t|^alpha)
///   GeneralizedCauchy:  r(t) = (1 + (C/gamma) |t|^alpha)^(-gamma)
class CorrelationModel {
public:
    static CorrelationModel powered_exponential(double C, double alpha);
    static CorrelationModel generalized_cauchy(double C, double alpha, double gamma);

    CorrelationFamily family() const { return family_; }
    double C() const { return c_; }
    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }

    double operator()(double t) const;
    /// 1 - r(t) without cancellation for small t.
    double one_minus(double t) const;

    std::string describe() const;

private:
    CorrelationModel(CorrelationFamily f, double C, double alpha, double gamma);

    CorrelationFamily family_;
    double c_;
    double alpha_;
    double gamma_;
};

double correlation_at(const CorrelationModel& model, double t);

struct ExpansionReport {
    double fitted_C = 0.0;
    double fitted_alpha = 0.0;
    /// RMS residual of the log-log fit.
    double residual = 0.0;
};

/// Log-log regression of 1 - r(t) on t over t in [1e-4, 1e-2]. Throws
/// ModelInconsistencyError unless the fitted exponent is within 1% and the
/// fitted constant within 2% of the declared values.
ExpansionReport local_expansion_check(const CorrelationModel& model);

} // namespace conjlab::gauss
