#pragma once

#include "cadepth/image_io.hpp"

#include <vector>

namespace cadepth {

// One patch-level decision covering [row, row+P) x [col, col+P).
struct PatchVote {
  int row = 0;
  int col = 0;
  int size = 1;
  bool confident = true;
};

// Per-pixel majority vote over the confident patches covering each pixel;
// ties go to the smaller size. Pixels with no confident voter copy the
// nearest voted pixel (4-connected distance, row-major tie order). If no
// patch is confident at all, every patch votes.
BlurSizeMap fuse_votes(int height, int width, int patch_size, const std::vector<PatchVote>& votes,
                       int max_size);

}  // namespace cadepth
