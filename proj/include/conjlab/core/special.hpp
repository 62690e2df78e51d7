#pragma once

namespace conjlab {

/// P(N(0,1) > u), computed through erfc. Throws DomainError for non-finite u.
double normal_survival(double u);

/// Mills-ratio form exp(-u^2/2) / (sqrt(2 pi) u). Throws DomainError for u <= 0.
double normal_survival_asymptotic(double u);

double normal_cdf(double x);

/// Inverse of normal_cdf on (0,1).
double normal_quantile(double p);

/// Two-sided critical value z with P(|N| <= z) = level.
double two_sided_z(double level);

} // namespace conjlab
