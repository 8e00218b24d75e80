#pragma once

#include <memory>
#include <string>

#include "grng/hierarchy.hpp"

namespace grng {

/// Versioned JSON container holding the dataset, radii, adjacency and
/// bounds. A loaded snapshot passes validate() cleanly and answers queries
/// identically to the instance that wrote it.
void save_hierarchy(const Hierarchy& h, const std::string& path);

std::unique_ptr<Hierarchy> load_hierarchy(const std::string& path);

}  // namespace grng
