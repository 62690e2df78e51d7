#pragma once

#include "conjlab/gauss/grid.hpp"

#include <iosfwd>
#include <span>

namespace conjlab::gauss {

/// One "t,value" line per grid point.
void write_path(std::ostream& os, const SamplePath& path);
SamplePath read_path(std::istream& is);

/// CSV matrix: header "t,path0,path1,...", one row per grid point.
void write_path_matrix(std::ostream& os, std::span<const SamplePath> paths);

} // namespace conjlab::gauss
