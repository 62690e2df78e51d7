#include "conjlab/core/estimate.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/special.hpp"

#include <cmath>

namespace conjlab {

double Estimate::ci_lo() const { return mean - two_sided_z(ci_level) * std_error; }
double Estimate::ci_hi() const { return mean + two_sided_z(ci_level) * std_error; }

Estimate Estimate::binomial(std::uint64_t hits, std::uint64_t n, double ci_level) {
    if (n == 0) throw DomainError("Estimate::binomial: no replicas");
    if (hits > n) throw DomainError("Estimate::binomial: hits exceed replicas");
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return Estimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, ci_level};
}

Estimate Estimate::from_samples(std::span<const double> xs, double ci_level) {
    if (xs.empty()) throw DomainError("Estimate::from_samples: no samples");
    Moments m;
    for (double x : xs) m.add(x);
    return m.estimate(ci_level);
}

double combined_stderr(const Estimate& a, const Estimate& b) {
    return std::hypot(a.std_error, b.std_error);
}

void Moments::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void Moments::merge(const Moments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
}

double Moments::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

Estimate Moments::estimate(double ci_level) const {
    if (n_ == 0) throw DomainError("Moments::estimate: no observations");
    return Estimate{mean_, std::sqrt(variance() / static_cast<double>(n_)), n_, ci_level};
}

} // namespace conjlab
