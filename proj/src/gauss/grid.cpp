#include "conjlab/gauss/grid.hpp"

#include "conjlab/core/error.hpp"

#include <cmath>

namespace conjlab::gauss {

GridSpec GridSpec::uniform(double t_max, std::size_t m) {
    if (m < 2) throw DomainError("grid needs at least two points");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("grid t_max must be positive");
    return GridSpec(t_max, t_max / static_cast<double>(m - 1), m);
}

GridSpec GridSpec::with_step(double step, std::size_t m) {
    if (m < 2) throw DomainError("grid needs at least two points");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid step must be positive");
    return GridSpec(step * static_cast<double>(m - 1), step, m);
}

} // namespace conjlab::gauss
