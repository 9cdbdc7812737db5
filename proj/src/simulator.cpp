#include "cadepth/simulator.hpp"

#include "cadepth/errors.hpp"
#include "cadepth/fft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cadepth {

Boundary parse_boundary(const std::string& name) {
  if (name == "reflect") return Boundary::reflect;
  if (name == "cyclic") return Boundary::cyclic;
  throw InvalidConfiguration("unknown boundary mode: " + name);
}

const char* to_string(Boundary b) { return b == Boundary::reflect ? "reflect" : "cyclic"; }

namespace {

// Convolves the window [row0, row0+h) x [col0, col0+w) of `src`, reading
// neighbours from the whole source with the given boundary rule.
Grid convolve_region(const Grid& src, int row0, int col0, int h, int w, const Grid& kernel,
                     Boundary boundary) {
  const int sh = static_cast<int>(src.rows());
  const int sw = static_cast<int>(src.cols());
  const int ks = static_cast<int>(kernel.rows());
  const int c = ks / 2;
  auto index = [boundary](int i, int n) {
    return boundary == Boundary::cyclic ? wrap_index(i, n) : reflect_index(i, n);
  };
  Grid out = Grid::Zero(h, w);
  for (int r = 0; r < h; ++r) {
    for (int q = 0; q < w; ++q) {
      double acc = 0.0;
      for (int i = 0; i < ks; ++i) {
        const int sr = index(row0 + r + c - i, sh);
        for (int j = 0; j < ks; ++j) acc += kernel(i, j) * src(sr, index(col0 + q + c - j, sw));
      }
      out(r, q) = acc;
    }
  }
  return out;
}

std::vector<int> tile_anchors(int extent, int p) {
  std::vector<int> anchors;
  for (int a = 0; a + p <= extent; a += p) anchors.push_back(a);
  if (anchors.empty() || anchors.back() + p < extent) anchors.push_back(extent - p);
  return anchors;
}

}  // namespace

Grid convolve_patch(const Grid& patch, const ScaledKernel& kernel, Boundary boundary) {
  if (kernel.size > patch.rows() || kernel.size > patch.cols())
    throw InvalidArgument("kernel larger than patch");
  return convolve_region(patch, 0, 0, static_cast<int>(patch.rows()), static_cast<int>(patch.cols()),
                         kernel.values, boundary);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a combined key.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GrayImage simulate_coded_image(const GrayImage& image, const BlurSizeMap& sizes,
                               const ApertureCode& code, const CameraConfig& cam,
                               const SimulationOptions& opts) {
  cam.validate();
  if (image.rows() != sizes.rows() || image.cols() != sizes.cols())
    throw InvalidArgument("image and blur-size map dimensions differ");
  const int p = opts.patch_size;
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  if (h < p || w < p) throw InvalidArgument("image smaller than the patch size");
  validate_size_map(sizes, cam.max_kernel_size);

  const auto rows = tile_anchors(h, p);
  const auto cols = tile_anchors(w, p);
  std::vector<Grid> kernels(cam.max_kernel_size + 1);
  GrayImage out(h, w);
  std::uint64_t tile_index = 0;
  for (int r0 : rows) {
    for (int c0 : cols) {
      const int s = sizes(r0 + p / 2, c0 + p / 2);
      if (kernels[s].size() == 0) kernels[s] = scale_code(code, s).values;
      Grid tile = convolve_region(image, r0, c0, p, p, kernels[s], opts.boundary);
      if (opts.noise_sigma > 0) {
        std::mt19937_64 rng(derive_seed(opts.seed, tile_index));
        std::normal_distribution<double> noise(0.0, opts.noise_sigma);
        for (Eigen::Index i = 0; i < tile.size(); ++i) tile.data()[i] += noise(rng);
      }
      out.block(r0, c0, p, p) = tile.cwiseMax(0.0).cwiseMin(1.0);
      ++tile_index;
    }
  }
  return out;
}

int patch_anchor_count(int extent, int stride, int patch_size) {
  if (extent < patch_size) return 0;
  return (extent - patch_size) / stride + 1;
}

std::vector<PatchRef> extract_patches(const GrayImage& image, int stride, int patch_size) {
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  const int nr = patch_anchor_count(static_cast<int>(image.rows()), stride, patch_size);
  const int nc = patch_anchor_count(static_cast<int>(image.cols()), stride, patch_size);
  std::vector<PatchRef> out;
  out.reserve(static_cast<size_t>(nr) * nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      out.push_back({image.block(i * stride, j * stride, patch_size, patch_size), i * stride, j * stride});
  return out;
}

Grid spectral_feature(const Grid& patch, SpectrumMode mode) {
  const Grid mag = fft::forward(patch).abs();
  return fft::fftshift(mode == SpectrumMode::log_magnitude ? Grid(mag.log1p()) : mag);
}

}  // namespace cadepth
