#pragma once

#include "cadepth/image_io.hpp"
#include "cadepth/optics.hpp"

#include <cstdint>
#include <vector>

namespace cadepth {

inline constexpr int kPatchSize = 32;

enum class Boundary { reflect, cyclic };

Boundary parse_boundary(const std::string& name);
const char* to_string(Boundary b);

// Same-size 2D convolution of a patch with a centered odd kernel.
Grid convolve_patch(const Grid& patch, const ScaledKernel& kernel, Boundary boundary);

struct SimulationOptions {
  int patch_size = kPatchSize;
  Boundary boundary = Boundary::reflect;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Blurs each P x P tile of `image` with the code scaled to the blur size at
// the tile center. Tiles sit at anchors 0, P, 2P, ...; a final tile is
// anchored to the far edge when the size is not a multiple of P. Blur reads
// neighbouring pixels from the whole image, so the boundary rule only
// applies at the image border.
GrayImage simulate_coded_image(const GrayImage& image, const BlurSizeMap& sizes,
                               const ApertureCode& code, const CameraConfig& cam,
                               const SimulationOptions& opts = {});

struct PatchRef {
  Grid patch;
  int row = 0;
  int col = 0;
};

// Every P x P window at anchors {0, stride, 2*stride, ...} that fits,
// row-major. Images smaller than P yield nothing.
std::vector<PatchRef> extract_patches(const GrayImage& image, int stride, int patch_size = kPatchSize);

// Anchor count along one axis.
int patch_anchor_count(int extent, int stride, int patch_size = kPatchSize);

enum class SpectrumMode { log_magnitude, magnitude };

// Zero-frequency-centered log(1 + |DFT(patch)|) (or raw |DFT|).
Grid spectral_feature(const Grid& patch, SpectrumMode mode = SpectrumMode::log_magnitude);

// Derives an independent 64-bit stream seed from a base seed and an index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace cadepth
