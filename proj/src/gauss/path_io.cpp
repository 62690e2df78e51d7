#include "conjlab/gauss/path_io.hpp"

#include "conjlab/core/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace conjlab::gauss {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_path(std::ostream& os, const SamplePath& path) {
    for (std::size_t k = 0; k < path.values.size(); ++k)
        os << fmt(path.grid.time(k)) << ',' << fmt(path.values[k]) << '\n';
}

SamplePath read_path(std::istream& is) {
    std::vector<double> ts, vs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ShapeError("read_path: expected 't,value' line");
        try {
            ts.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ShapeError("read_path: unparsable line '" + line + "'");
        }
    }
    if (ts.size() < 2) throw ShapeError("read_path: need at least two grid points");
    const double step = ts[1] - ts[0];
    if (ts[0] != 0.0 || !(step > 0.0)) throw ShapeError("read_path: grid must start at 0 and increase");
    for (std::size_t k = 0; k < ts.size(); ++k)
        if (std::abs(ts[k] - static_cast<double>(k) * step) > 1e-9 * (1.0 + ts[k]))
            throw ShapeError("read_path: grid is not uniform");
    return SamplePath{GridSpec::with_step(step, ts.size()), std::move(vs)};
}

void write_path_matrix(std::ostream& os, std::span<const SamplePath> paths) {
    if (paths.empty()) return;
    const GridSpec& g = paths.front().grid;
    for (const auto& p : paths)
        if (!(p.grid == g)) throw ShapeError("write_path_matrix: grids differ");
    os << 't';
    for (std::size_t r = 0; r < paths.size(); ++r) os << ",path" << r;
    os << '\n';
    for (std::size_t k = 0; k < g.m(); ++k) {
        os << fmt(g.time(k));
        for (const auto& p : paths) os << ',' << fmt(p.values[k]);
        os << '\n';
    }
}

} // namespace conjlab::gauss
