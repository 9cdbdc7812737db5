#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's numerical code.

#include "cadepth/grid.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace oracle {

using cadepth::CGrid;
using cadepth::Grid;

inline Grid random_grid(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Grid g(h, w);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = d(rng);
  return g;
}

inline Grid random_binary(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Grid g(n, n);
  do {
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = static_cast<double>(rng() & 1u);
  } while (g.sum() == 0.0);
  return g;
}

// Textured patch: white noise smoothed lightly so it looks like an image
// but keeps every frequency.
inline Grid textured(int h, int w, std::uint64_t seed) {
  Grid n = random_grid(h, w, seed);
  Grid out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(r, c) = 0.6 * n(r, c) + 0.4 * n((r + 1) % h, (c + 1) % w);
  return out;
}

// Direct nested-loop same-size convolution with a centered odd kernel.
// mode 'c' wraps, 'r' reflects (edge pixel repeated).
inline Grid convolve(const Grid& x, const Grid& k, char mode) {
  const int h = static_cast<int>(x.rows()), w = static_cast<int>(x.cols());
  const int s = static_cast<int>(k.rows()), c0 = s / 2;
  auto idx = [mode](int i, int n) {
    if (mode == 'c') return ((i % n) + n) % n;
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
    return i;
  };
  Grid out = Grid::Zero(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) acc += k(i, j) * x(idx(r + c0 - i, h), idx(c + c0 - j, w));
      out(r, c) = acc;
    }
  return out;
}

// O(N^4) DFT, unnormalized, negative exponent.
inline CGrid dft(const Grid& x) {
  const int h = static_cast<int>(x.rows()), w = static_cast<int>(x.cols());
  CGrid out(h, w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int m = 0; m < h; ++m)
        for (int n = 0; n < w; ++n) {
          const double ph = -2.0 * M_PI * (static_cast<double>(u * m) / h + static_cast<double>(v * n) / w);
          acc += x(m, n) * std::polar(1.0, ph);
        }
      out(u, v) = acc;
    }
  return out;
}

// Kernel placed on an h x w grid with its center at (0, 0).
inline Grid pad_centered(const Grid& k, int h, int w) {
  Grid out = Grid::Zero(h, w);
  const int s = static_cast<int>(k.rows()), c0 = s / 2;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) out(((i - c0) % h + h) % h, ((j - c0) % w + w) % w) += k(i, j);
  return out;
}

// Thin-lens blur radius in pixels via the Gaussian lens equation written in
// meters: 1/f = 1/d + 1/v.
inline double blur_radius_px(double d, double f_mm = 25, double pitch_um = 8, double fnum = 1.4, double df = 1.0) {
  const double f = f_mm * 1e-3;
  const double aperture = f / fnum;
  const double v = 1.0 / (1.0 / f - 1.0 / d);
  const double vf = 1.0 / (1.0 / f - 1.0 / df);
  const double c = aperture * std::abs(vf - v) / v;
  return 0.5 * c / (pitch_um * 1e-6);
}

inline int blur_size(double d, int k = 13, double df = 1.0) {
  const double r = blur_radius_px(d, 25, 8, 1.4, df);
  int s = 2 * static_cast<int>(std::round(r)) + 1;
  return s > k ? k : s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cadepth_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
