#include "conjlab/core/ks.hpp"

#include "conjlab/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace conjlab {

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_statistic: empty sample");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic_exp1(std::span<const double> sample) {
    return ks_statistic(sample, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
}

double ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= t) ++i;
        while (j < b.size() && b[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {
double kolmogorov_c(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("KS level must lie in (0,1)");
    return std::sqrt(-0.5 * std::log(level / 2.0));
}
} // namespace

double ks_critical_value(std::size_t n, double level) {
    if (n == 0) throw DomainError("ks_critical_value: n must be positive");
    return kolmogorov_c(level) / std::sqrt(static_cast<double>(n));
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
    if (n == 0 || m == 0) throw DomainError("ks_critical_value: sizes must be positive");
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return kolmogorov_c(level) * std::sqrt((dn + dm) / (dn * dm));
}

double ks_pvalue(double d, double n_effective) {
    const double lambda = (std::sqrt(n_effective) + 0.12 + 0.11 / std::sqrt(n_effective)) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

} // namespace conjlab
