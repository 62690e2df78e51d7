#include "conjlab/gauss/correlation.hpp"

#include "conjlab/core/error.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace conjlab::gauss {

std::string to_string(CorrelationFamily f) {
    return f == CorrelationFamily::PoweredExponential ? "powered_exponential" : "generalized_cauchy";
}

CorrelationFamily correlation_family_from_string(const std::string& name) {
    if (name == "powered_exponential") return CorrelationFamily::PoweredExponential;
    if (name == "generalized_cauchy") return CorrelationFamily::GeneralizedCauchy;
    throw ConfigError("unknown correlation family '" + name +
                      "' (expected powered_exponential or generalized_cauchy)");
}

CorrelationModel::CorrelationModel(CorrelationFamily f, double C, double alpha, double gamma)
    : family_(f), c_(C), alpha_(alpha), gamma_(gamma) {
    if (!(C > 0.0) || !std::isfinite(C)) throw DomainError("correlation constant C must be positive");
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw DomainError("correlation exponent alpha must lie in (0,2] (local expansion "
                          "r(t) = 1 - C|t|^alpha + o(|t|^alpha)); got " + std::to_string(alpha));
    if (f == CorrelationFamily::GeneralizedCauchy && !(gamma > 0.0 && std::isfinite(gamma)))
        throw DomainError("generalized Cauchy gamma must be positive");
}

CorrelationModel CorrelationModel::powered_exponential(double C, double alpha) {
    return CorrelationModel(CorrelationFamily::PoweredExponential, C, alpha, 0.0);
}

CorrelationModel CorrelationModel::generalized_cauchy(double C, double alpha, double gamma) {
    return CorrelationModel(CorrelationFamily::GeneralizedCauchy, C, alpha, gamma);
}

double CorrelationModel::operator()(double t) const {
    const double x = std::pow(std::abs(t), alpha_);
    if (family_ == CorrelationFamily::PoweredExponential) return std::exp(-c_ * x);
    return std::exp(-gamma_ * std::log1p(c_ / gamma_ * x));
}

double CorrelationModel::one_minus(double t) const {
    const double x = std::pow(std::abs(t), alpha_);
    if (family_ == CorrelationFamily::PoweredExponential) return -std::expm1(-c_ * x);
    return -std::expm1(-gamma_ * std::log1p(c_ / gamma_ * x));
}

std::string CorrelationModel::describe() const {
    std::ostringstream os;
    os << to_string(family_) << "(C=" << c_ << ", alpha=" << alpha_;
    if (family_ == CorrelationFamily::GeneralizedCauchy) os << ", gamma=" << gamma_;
    os << ")";
    return os.str();
}

double correlation_at(const CorrelationModel& model, double t) {
    if (!std::isfinite(t)) throw DomainError("correlation_at: t must be finite");
    return model(t);
}

ExpansionReport local_expansion_check(const CorrelationModel& model) {
    constexpr int kPoints = 41;
    const double lo = std::log(1e-4), hi = std::log(1e-2);
    std::vector<double> xs(kPoints), ys(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        xs[i] = lo + (hi - lo) * i / (kPoints - 1);
        ys[i] = std::log(model.one_minus(std::exp(xs[i])));
    }
    double mx = 0, my = 0;
    for (int i = 0; i < kPoints; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= kPoints;
    my /= kPoints;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < kPoints; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    ExpansionReport rep;
    rep.fitted_alpha = sxy / sxx;
    const double intercept = my - rep.fitted_alpha * mx;
    rep.fitted_C = std::exp(intercept);
    double ss = 0;
    for (int i = 0; i < kPoints; ++i) {
        const double r = ys[i] - (intercept + rep.fitted_alpha * xs[i]);
        ss += r * r;
    }
    rep.residual = std::sqrt(ss / kPoints);

    const bool alpha_ok = std::abs(rep.fitted_alpha - model.alpha()) <= 0.01 * model.alpha();
    const bool c_ok = std::abs(rep.fitted_C - model.C()) <= 0.02 * model.C();
    if (!alpha_ok || !c_ok) {
        std::ostringstream os;
        os << "local expansion of " << model.describe() << " is inconsistent with its declared "
           << "(C, alpha): fitted C=" << rep.fitted_C << ", alpha=" << rep.fitted_alpha;
        throw ModelInconsistencyError(os.str());
    }
    return rep;
}

} // namespace conjlab::gauss
