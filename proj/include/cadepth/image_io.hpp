#pragma once

#include "cadepth/grid.hpp"

#include <filesystem>

namespace cadepth {

// Grayscale image, intensities in [0,1].
using GrayImage = Grid;
// Per-pixel odd blur sizes.
using BlurSizeMap = IntGrid;

// Format is chosen by extension: .pgm (binary P5) and .png are 8-bit;
// .txt is a full-precision text grid.
GrayImage load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const GrayImage& image);

// Text grid: "height width" line, then row-major values.
BlurSizeMap load_size_map(const std::filesystem::path& path);
void save_size_map(const std::filesystem::path& path, const BlurSizeMap& sizes);
Grid load_depth_map(const std::filesystem::path& path);
void save_depth_map(const std::filesystem::path& path, const Grid& depth);

// Viewable 8-bit rendering of a size map (value s maps to 255 * s / max_size).
void save_size_map_pgm(const std::filesystem::path& path, const BlurSizeMap& sizes, int max_size);

// Throws InvalidArgument unless every entry is odd and within [1, max_size].
void validate_size_map(const BlurSizeMap& sizes, int max_size);

}  // namespace cadepth
