#pragma once

#include "conjlab/core/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace conjlab::gauss {

enum class Factorization { Scalar, Circulant, Cholesky };

enum class FactorizationPolicy {
    Auto,             ///< circulant embedding, dense Cholesky if the embedding is not PSD
    CirculantOnly,    ///< throw CovarianceNotPsdError instead of falling back
    CholeskyOnly,
};

/// Per-worker scratch memory for ToeplitzSampler::sample. Not shareable.
class SamplerWorkspace {
public:
    SamplerWorkspace();
    ~SamplerWorkspace();
    SamplerWorkspace(SamplerWorkspace&&) noexcept;
    SamplerWorkspace& operator=(SamplerWorkspace&&) noexcept;

    /// Interleaved (re, im) storage for n complex values; FFTW-aligned.
    double* complex_buffer(std::size_t n);
    double* real_buffer(std::size_t n);
    std::vector<double>& scratch() { return scratch_; }

private:
    struct Buffer;
    std::unique_ptr<Buffer> complex_;
    std::unique_ptr<Buffer> real_;
    std::vector<double> scratch_;
};

/// Exact sampler for a centered Gaussian vector with Toeplitz covariance
/// cov(i, j) = acov(|i - j|), i, j < m.
///
/// The circulant embedding of the first row has length 2(m-1), doubled up to
/// three times while it has eigenvalues below -1e-10 acov(0). Eigenvalues in
/// [-1e-10 acov(0), 0) are clipped to zero with a logged warning. If every
/// embedding fails the sampler falls back to a dense pivoted Cholesky factor.
///
/// The factorization is computed once; sample() is const and thread-safe.
class ToeplitzSampler {
public:
    ToeplitzSampler(const std::function<double(std::size_t)>& acov, std::size_t m,
                    FactorizationPolicy policy = FactorizationPolicy::Auto);

    std::size_t size() const { return m_; }
    Factorization method() const { return method_; }
    std::size_t embedding_size() const { return embed_; }
    /// Number of eigenvalues that were clipped to zero.
    std::size_t clipped_eigenvalues() const { return clipped_; }

    void sample(RandomStream& stream, std::span<double> out, SamplerWorkspace& ws) const;

private:
    bool try_circulant(const std::function<double(std::size_t)>& acov, std::size_t embed);
    void build_cholesky(const std::function<double(std::size_t)>& acov);

    struct Plan;

    std::size_t m_;
    Factorization method_ = Factorization::Scalar;
    std::size_t embed_ = 0;
    std::size_t clipped_ = 0;
    double scalar_sd_ = 0.0;
    std::vector<double> weights_;   // sqrt(lambda_k / M), k = 0..M/2
    std::shared_ptr<Plan> plan_;
    Eigen::MatrixXd factor_;
};

} // namespace conjlab::gauss
