#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/gauss/samplers.hpp"
#include "conjlab/limit/ensemble.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace conjlab::limit {

/// Precomputed ingredients for sampling the limit process at t = a k, k = 1..K.
///
///   Z(t) = min_i [ (sqrt2 b_i^-1 B_i(c_i Theta_i t) - C_i (Theta_i t)^alpha_i) 1(alpha_i = alpha_min)
///                  + b_i^-2 E_i ],   c_i = C_i^(1/alpha_i)
///
/// with b_i = 1 and Theta_i = 1 unless the variant uses them. Each B_i is
/// sampled on its own grid of step c_i a; the time change acts through
/// self-similarity, B(c Theta t) = Theta^(alpha/2) B(c t) in law given Theta.
///
/// Process i of a replica draws from substream i of the replica stream, in the
/// order E_i, Theta_i, path. Adding processes or changing K therefore never
/// alters the randomness seen by the others.
class LimitSampler {
public:
    LimitSampler(const EnsembleSpec& spec, const LimitVariant& variant, double a, std::size_t K);

    double a() const { return a_; }
    std::size_t K() const { return K_; }
    std::size_t components() const { return comps_.size(); }
    const EnsembleSpec& spec() const { return spec_; }
    const LimitVariant& variant() const { return variant_; }

    /// Fills out[k-1] = Z(a k), k = 1..K.
    void sample(const RandomStream& replica, std::span<double> out) const;

private:
    friend class LimitCursor;

    enum class PathKind { Constant, White, Line, General };

    struct Component {
        PathKind kind = PathKind::Constant;
        double alpha = 1.0;
        double scale = 0.0;    // sqrt2 / b
        double weight = 1.0;   // b^-2
        double step = 0.0;     // c a
        double increment_sd = 0.0;
        std::optional<TimeChangeLaw> theta;
        std::vector<double> drift;  // C (a k)^alpha, k = 1..K
        std::optional<gauss::FbmSampler> fbm;
    };

    EnsembleSpec spec_;
    LimitVariant variant_;
    double a_;
    std::size_t K_;
    std::vector<Component> comps_;
};

/// Sequential evaluation of one replica: next() returns Z(a k) for k = 1, 2, ...
/// Paths with alpha in {1, 2} are generated incrementally, so a caller that
/// stops early pays only for the steps it used.
class LimitCursor {
public:
    explicit LimitCursor(const LimitSampler& sampler);

    void start(const RandomStream& replica);
    double next();
    std::size_t position() const { return k_; }

private:
    struct State {
        RandomStream stream{0, 0};
        double e_term = 0.0;
        double theta_scale = 1.0;
        double theta_drift = 1.0;
        double level = 0.0;
        double slope = 0.0;
        std::vector<double> path;
    };

    const LimitSampler* sampler_;
    std::vector<State> states_;
    gauss::SamplerWorkspace ws_;
    std::size_t k_ = 0;
};

std::vector<double> sample_limit_path(const EnsembleSpec& spec, const LimitVariant& variant,
                                      double a, std::size_t K, const RandomStream& stream);

/// a * #{k : path[k] > 0}.
double occupation_time(std::span<const double> path, double a);

/// P(Z_i(t) > 0) for a single active process: 2 Psi(b sqrt(C (Theta t)^alpha / 2)),
/// averaged over Theta (an upper bound for the uniform law).
double single_time_exceedance(const ProcessSpec& process, double t);

/// Upper bound on P(exists k > K : Z(a k) > 0): sum over k > K of the smallest
/// single-time exceedance among the active processes. Infinite if the sum diverges.
double tail_truncation_bound(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                             std::size_t K);

/// Smallest K with tail_truncation_bound <= epsilon * a. Throws FeasibilityError
/// when no finite K qualifies.
std::size_t certified_K(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                        double epsilon);

/// Throws FeasibilityError (advising certified_K) when K is not certified.
void certify_truncation(const EnsembleSpec& spec, const LimitVariant& variant, double a,
                        std::size_t K, double epsilon);

} // namespace conjlab::limit
