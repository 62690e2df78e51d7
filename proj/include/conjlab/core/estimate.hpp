#pragma once

#include <cstdint>
#include <span>

namespace conjlab {

/// Monte Carlo point estimate with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_replicas = 0;
    double ci_level = 0.95;

    double ci_lo() const;
    double ci_hi() const;

    /// Proportion estimate with stderr sqrt(p(1-p)/n).
    static Estimate binomial(std::uint64_t hits, std::uint64_t n, double ci_level = 0.95);
    /// Sample mean with stderr = sample standard deviation / sqrt(n).
    static Estimate from_samples(std::span<const double> xs, double ci_level = 0.95);
};

/// Standard error of the difference of two estimates treated as independent.
double combined_stderr(const Estimate& a, const Estimate& b);

/// Streaming mean/variance (Welford) with a deterministic merge.
class Moments {
public:
    void add(double x);
    void merge(const Moments& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 when fewer than two observations.
    double variance() const;
    Estimate estimate(double ci_level = 0.95) const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace conjlab
