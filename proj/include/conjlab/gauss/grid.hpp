#pragma once

#include <cstddef>
#include <vector>

namespace conjlab::gauss {

/// Uniform grid {0, step, ..., (m-1) step} on [0, t_max].
class GridSpec {
public:
    /// m points spanning [0, t_max].
    static GridSpec uniform(double t_max, std::size_t m);
    /// m points with the given spacing.
    static GridSpec with_step(double step, std::size_t m);

    double t_max() const { return t_max_; }
    double step() const { return step_; }
    std::size_t m() const { return m_; }
    double time(std::size_t k) const { return static_cast<double>(k) * step_; }

    bool operator==(const GridSpec&) const = default;

private:
    GridSpec(double t_max, double step, std::size_t m) : t_max_(t_max), step_(step), m_(m) {}

    double t_max_;
    double step_;
    std::size_t m_;
};

struct SamplePath {
    GridSpec grid;
    std::vector<double> values;
};

} // namespace conjlab::gauss
