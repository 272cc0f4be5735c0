#pragma once

#include <string>

#include "dw/grid.hpp"

namespace dw {

/// Grid file: one JSON header line {"d":..,"J":..,"nonneg":..} followed by
/// the N^d cell values as little-endian 64-bit floats, row-major.
void save_grid(const std::string& path, const GridFunction& f);
GridFunction load_grid(const std::string& path);

/// Plain-text loader for small fixtures: one value per line, cell count must
/// be (2^J)^d for some J.
GridFunction load_grid_csv(const std::string& path, int d);

}  // namespace dw
