#pragma once

#include "conjlab/core/estimate.hpp"
#include "conjlab/gauss/grid.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace conjlab::gauss {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Unbiased sample covariance between grid points i and j for each requested
/// pair. The standard error is the standard deviation of the centred products
/// divided by sqrt(n). Needs at least two paths on a common grid.
std::vector<Estimate> empirical_covariance(std::span<const SamplePath> paths,
                                           std::span<const IndexPair> pairs);

/// Same, for raw rows of equal length.
std::vector<Estimate> empirical_covariance(std::span<const std::vector<double>> rows,
                                           std::span<const IndexPair> pairs);

} // namespace conjlab::gauss
