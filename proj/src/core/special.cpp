#include "conjlab/core/special.hpp"

#include "conjlab/core/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

namespace conjlab {

double normal_survival(double u) {
    if (!std::isfinite(u)) throw DomainError("normal_survival: argument must be finite");
    return 0.5 * std::erfc(u / std::numbers::sqrt2);
}

double normal_survival_asymptotic(double u) {
    if (!(u > 0.0) || !std::isfinite(u))
        throw DomainError("normal_survival_asymptotic: u must be positive and finite");
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * u);
}

double normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("normal_cdf: argument must be finite");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double two_sided_z(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
    return normal_quantile(0.5 + 0.5 * level);
}

} // namespace conjlab
