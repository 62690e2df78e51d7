#pragma once

#include <functional>
#include <span>

namespace conjlab {

/// One-sample Kolmogorov-Smirnov distance sup |F_n - F|.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// KS distance against the unit exponential law.
double ks_statistic_exp1(std::span<const double> sample);

/// Two-sample KS distance.
double ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Asymptotic one-sample critical value at significance `level` (e.g. 0.05).
double ks_critical_value(std::size_t n, double level = 0.05);
/// Asymptotic two-sample critical value.
double ks_critical_value(std::size_t n, std::size_t m, double level = 0.05);

/// Asymptotic p-value from the Kolmogorov distribution for effective size n.
double ks_pvalue(double d, double n_effective);

} // namespace conjlab
