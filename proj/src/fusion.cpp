#include "cadepth/fusion.hpp"

#include <algorithm>
#include <deque>

namespace cadepth {

BlurSizeMap fuse_votes(int height, int width, int patch_size, const std::vector<PatchVote>& votes,
                       int max_size) {
  const int classes = (max_size + 1) / 2;
  const bool any_confident =
      std::any_of(votes.begin(), votes.end(), [](const PatchVote& v) { return v.confident; });

  std::vector<int> counts(static_cast<size_t>(height) * width * classes, 0);
  for (const auto& v : votes) {
    if (any_confident && !v.confident) continue;
    const int cls = (v.size - 1) / 2;
    const int r1 = std::min(height, v.row + patch_size);
    const int c1 = std::min(width, v.col + patch_size);
    for (int r = std::max(0, v.row); r < r1; ++r)
      for (int c = std::max(0, v.col); c < c1; ++c)
        ++counts[(static_cast<size_t>(r) * width + c) * classes + cls];
  }

  BlurSizeMap out = BlurSizeMap::Zero(height, width);
  std::deque<std::pair<int, int>> frontier;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int* cnt = &counts[(static_cast<size_t>(r) * width + c) * classes];
      int best = -1;
      for (int k = 0; k < classes; ++k)
        if (cnt[k] > 0 && (best < 0 || cnt[k] > cnt[best])) best = k;
      if (best >= 0) {
        out(r, c) = 2 * best + 1;
        frontier.emplace_back(r, c);
      }
    }
  }
  if (frontier.empty()) {
    out.setOnes();
    return out;
  }
  // Multi-source BFS fills unvoted pixels from their nearest voted pixel.
  const int dr[4] = {-1, 0, 0, 1};
  const int dc[4] = {0, -1, 1, 0};
  while (!frontier.empty()) {
    auto [r, c] = frontier.front();
    frontier.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k];
      const int nc = c + dc[k];
      if (nr < 0 || nc < 0 || nr >= height || nc >= width || out(nr, nc) != 0) continue;
      out(nr, nc) = out(r, c);
      frontier.emplace_back(nr, nc);
    }
  }
  return out;
}

}  // namespace cadepth
