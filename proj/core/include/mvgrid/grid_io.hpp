#pragma once

#include <filesystem>

#include "mvgrid/view_grid.hpp"

namespace mvgrid {

// Directory layout:
//   <dir>/manifest.json
//   <dir>/cam{i:03}/t{j:04}.png   (16-bit RGB, only for non-empty cells)
void save_grid(const ViewGrid& grid, const std::filesystem::path& dir);
ViewGrid load_grid(const std::filesystem::path& dir);

std::filesystem::path cell_path(const std::filesystem::path& dir, int row, int col);

}  // namespace mvgrid
