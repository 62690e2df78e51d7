#include "conjlab/gauss/covariance.hpp"

#include "conjlab/core/error.hpp"

#include <cmath>

namespace conjlab::gauss {

std::vector<Estimate> empirical_covariance(std::span<const std::vector<double>> rows,
                                           std::span<const IndexPair> pairs) {
    const std::size_t n = rows.size();
    if (n < 2) throw InsufficientDataError("empirical_covariance: need at least two paths");
    const std::size_t len = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != len) throw ShapeError("empirical_covariance: paths differ in length");

    std::vector<Estimate> out;
    out.reserve(pairs.size());
    for (auto [i, j] : pairs) {
        if (i >= len || j >= len) throw ShapeError("empirical_covariance: index outside the grid");
        double mi = 0.0, mj = 0.0;
        for (const auto& r : rows) {
            mi += r[i];
            mj += r[j];
        }
        mi /= static_cast<double>(n);
        mj /= static_cast<double>(n);
        Moments prod;
        for (const auto& r : rows) prod.add((r[i] - mi) * (r[j] - mj));
        const double nd = static_cast<double>(n);
        Estimate e;
        e.mean = prod.mean() * nd / (nd - 1.0);
        e.std_error = std::sqrt(prod.variance() / nd);
        e.n_replicas = n;
        out.push_back(e);
    }
    return out;
}

std::vector<Estimate> empirical_covariance(std::span<const SamplePath> paths,
                                           std::span<const IndexPair> pairs) {
    if (paths.size() < 2) throw InsufficientDataError("empirical_covariance: need at least two paths");
    std::vector<std::vector<double>> rows;
    rows.reserve(paths.size());
    for (const auto& p : paths) {
        if (!(p.grid == paths.front().grid)) throw ShapeError("empirical_covariance: grids differ");
        if (p.values.size() != p.grid.m()) throw ShapeError("empirical_covariance: path length mismatch");
        rows.push_back(p.values);
    }
    return empirical_covariance(std::span<const std::vector<double>>(rows), pairs);
}

} // namespace conjlab::gauss
