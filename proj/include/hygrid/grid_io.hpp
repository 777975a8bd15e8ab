#pragma once

#include <filesystem>
#include <string>

#include "hygrid/grid_model.hpp"

namespace hygrid {

/// Loads a grid description document (JSON, schema in docs/grid_format.md).
/// Accepts SI units or per-unit per field; converts to per-unit on the declared bases.
/// Unknown keys anywhere in the document are rejected. Throws FileError.
GridModel load_grid(const std::filesystem::path& path);

GridModel parse_grid(const std::string& json_text, const std::string& origin = "<string>");

}  // namespace hygrid
