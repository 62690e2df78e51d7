#include "conjlab/gauss/toeplitz.hpp"

#include "conjlab/core/error.hpp"
#include "conjlab/core/linalg.hpp"
#include "conjlab/core/log.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace conjlab::gauss {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

struct SamplerWorkspace::Buffer {
    double* data = nullptr;
    std::size_t capacity = 0;

    ~Buffer() { fftw_free(data); }

    double* ensure(std::size_t n) {
        if (n > capacity) {
            fftw_free(data);
            data = static_cast<double*>(fftw_malloc(sizeof(double) * n));
            if (data == nullptr) throw std::bad_alloc();
            capacity = n;
        }
        return data;
    }
};

SamplerWorkspace::SamplerWorkspace()
    : complex_(std::make_unique<Buffer>()), real_(std::make_unique<Buffer>()) {}
SamplerWorkspace::~SamplerWorkspace() = default;
SamplerWorkspace::SamplerWorkspace(SamplerWorkspace&&) noexcept = default;
SamplerWorkspace& SamplerWorkspace::operator=(SamplerWorkspace&&) noexcept = default;

double* SamplerWorkspace::complex_buffer(std::size_t n) { return complex_->ensure(2 * n); }
double* SamplerWorkspace::real_buffer(std::size_t n) { return real_->ensure(n); }

struct ToeplitzSampler::Plan {
    fftw_plan c2r = nullptr;

    ~Plan() {
        std::lock_guard lock(fftw_planner_mutex());
        if (c2r) fftw_destroy_plan(c2r);
    }
};

ToeplitzSampler::ToeplitzSampler(const std::function<double(std::size_t)>& acov, std::size_t m,
                                 FactorizationPolicy policy)
    : m_(m) {
    if (m == 0) throw DomainError("ToeplitzSampler: empty covariance");
    const double var = acov(0);
    if (!(var >= 0.0) || !std::isfinite(var)) throw CovarianceNotPsdError("negative variance");
    if (m == 1) {
        method_ = Factorization::Scalar;
        scalar_sd_ = std::sqrt(var);
        return;
    }
    if (policy != FactorizationPolicy::CholeskyOnly) {
        std::size_t embed = 2 * (m - 1);
        for (int attempt = 0; attempt <= 3; ++attempt, embed *= 2) {
            if (try_circulant(acov, embed)) return;
        }
        if (policy == FactorizationPolicy::CirculantOnly)
            throw CovarianceNotPsdError("circulant embedding has negative eigenvalues after 3 doublings");
    }
    build_cholesky(acov);
}

bool ToeplitzSampler::try_circulant(const std::function<double(std::size_t)>& acov,
                                    std::size_t embed) {
    const std::size_t half = embed / 2;
    std::vector<double> row(embed);
    for (std::size_t j = 0; j < embed; ++j) row[j] = acov(std::min(j, embed - j));

    std::vector<double> spectrum(2 * (half + 1));
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(embed), row.data(),
                                           reinterpret_cast<fftw_complex*>(spectrum.data()),
                                           FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }

    const double tol = 1e-10 * std::max(acov(0), std::numeric_limits<double>::min());
    std::vector<double> lambda(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        lambda[k] = spectrum[2 * k];
        if (lambda[k] < -tol) return false;
    }

    clipped_ = 0;
    weights_.assign(half + 1, 0.0);
    const double inv = 1.0 / static_cast<double>(embed);
    for (std::size_t k = 0; k <= half; ++k) {
        if (lambda[k] < 0.0) {
            ++clipped_;
            lambda[k] = 0.0;
        }
        weights_[k] = std::sqrt(lambda[k] * inv);
    }
    if (clipped_ > 0)
        log_warning("circulant embedding: clipped " + std::to_string(clipped_) +
                    " slightly negative eigenvalue(s) to zero (embedding length " +
                    std::to_string(embed) + ")");

    plan_ = std::make_shared<Plan>();
    {
        std::lock_guard lock(fftw_planner_mutex());
        auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (half + 1)));
        auto* out = static_cast<double*>(fftw_malloc(sizeof(double) * embed));
        plan_->c2r = fftw_plan_dft_c2r_1d(static_cast<int>(embed), in, out, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
    }
    if (plan_->c2r == nullptr) throw Error("FFTW could not create a c2r plan");
    method_ = Factorization::Circulant;
    embed_ = embed;
    return true;
}

void ToeplitzSampler::build_cholesky(const std::function<double(std::size_t)>& acov) {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            cov(i, j) = acov(static_cast<std::size_t>(std::abs(i - j)));
    factor_ = psd_factor(cov);
    method_ = Factorization::Cholesky;
}

void ToeplitzSampler::sample(RandomStream& stream, std::span<double> out,
                             SamplerWorkspace& ws) const {
    if (out.size() != m_) throw ShapeError("ToeplitzSampler::sample: output has wrong length");
    switch (method_) {
    case Factorization::Scalar:
        out[0] = scalar_sd_ * stream.normal();
        return;
    case Factorization::Circulant: {
        const std::size_t half = embed_ / 2;
        double* spec = ws.complex_buffer(half + 1);
        double* real = ws.real_buffer(embed_);
        // Hermitian white noise: real at k = 0 and k = M/2, complex with
        // E|xi|^2 = 1 in between.
        spec[0] = weights_[0] * stream.normal();
        spec[1] = 0.0;
        for (std::size_t k = 1; k < half; ++k) {
            const double w = weights_[k] * (1.0 / std::numbers::sqrt2);
            spec[2 * k] = w * stream.normal();
            spec[2 * k + 1] = w * stream.normal();
        }
        spec[2 * half] = weights_[half] * stream.normal();
        spec[2 * half + 1] = 0.0;
        fftw_execute_dft_c2r(plan_->c2r, reinterpret_cast<fftw_complex*>(spec), real);
        std::copy_n(real, m_, out.begin());
        return;
    }
    case Factorization::Cholesky: {
        auto& z = ws.scratch();
        z.resize(m_);
        for (auto& v : z) v = stream.normal();
        Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(m_));
        Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(m_));
        ov.noalias() = factor_ * zv;
        return;
    }
    }
}

} // namespace conjlab::gauss
