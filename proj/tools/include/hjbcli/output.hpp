#pragma once

#include "hjb/branch.hpp"
#include "hjb/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hjbcli {

/// Writes through a temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// node,x,y,<names...>; 17 significant digits.
std::string nodal_csv(const hjb::Grid& grid, const std::vector<std::string>& names,
                      const std::vector<const hjb::GridFunction*>& columns);

/// branch,lambda,signed_sup_norm
std::string polylines_csv(const hjb::Diagram& d);
/// lambda,count
std::string counts_csv(const hjb::Diagram& d);
std::string diagram_csv(const hjb::Diagram& d);

/// Static rendering of the polylines: lambda against sign(v) log10(1 + |v|), with dashed
/// verticals at the marked lambdas.
std::string diagram_svg(const hjb::Diagram& d, const std::vector<std::pair<std::string, double>>& marks);

}  // namespace hjbcli
