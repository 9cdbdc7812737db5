#pragma once

#include "cadepth/fusion.hpp"
#include "cadepth/simulator.hpp"

#include <Eigen/Cholesky>

#include <iosfwd>
#include <vector>

namespace cadepth {

// How a patch relates to the scene outside it during deconvolution.
//   cyclic  - the patch is one period of a cyclically blurred signal.
//   reflect - the patch is reflect-padded before frequency-domain filtering.
//   valid   - the patch is the fully-determined window of a larger blurred
//             scene; the unknown sharp region extends (s-1)/2 pixels beyond
//             it on every side. Solved exactly in the spatial domain.
enum class DeconvBoundary { cyclic, reflect, valid };

DeconvBoundary parse_deconv_boundary(const std::string& name);
const char* to_string(DeconvBoundary b);

struct WienerConfig {
  double nsr = 1e-3;
  std::vector<int> scales = all_sizes(13);
  DeconvBoundary boundary = DeconvBoundary::valid;
  // Patches whose intensity standard deviation falls below this are flagged
  // low-confidence.
  double texture_floor = 0.01;

  void validate(int max_kernel_size) const;
};

// Wiener filter conj(K) / (|K|^2 + nsr). Cyclic and reflect modes filter in
// the frequency domain (reflect on a padded extension, center-cropped);
// valid mode returns the center crop of K^T (K K^T + nsr I)^-1 y, the same
// filter without a periodicity assumption. Output is not clamped. Throws
// DivisionGuard when nsr == 0 meets an exactly singular kernel.
Grid wiener_deconvolve(const Grid& patch, const ScaledKernel& kernel, double nsr,
                       DeconvBoundary boundary = DeconvBoundary::cyclic);

struct ScaleEstimate {
  int best_scale = 1;
  bool confident = true;
  // l2 norm of (K_s * x_s - y) per candidate scale, y mean-removed.
  std::vector<double> residuals;
  // Selection score per candidate scale; best_scale is its argmin.
  std::vector<double> scores;
};

// Scale selection by Wiener deconvolution and re-blur.
//
// A bare re-blur residual always prefers the kernel with the largest
// transfer magnitude (the delta), since |nsr / (|K|^2 + nsr)| shrinks as |K|
// grows. The score therefore weighs the re-blur error against the
// per-scale Gaussian evidence:
//
//   score_s = (M - 1) ln(|r_s|^2 / nsr + |x_s|^2) + ln det(K_s K_s^T + nsr I)
//
// i.e. -2 log p(y | s) up to constants for a white image model with
// profiled amplitude, where M is the pixel count. The log-determinant is
// the sum of ln(|K_s(nu)|^2 + nsr) over DFT bins in cyclic and reflect
// modes and an exact Cholesky log-determinant in valid mode.
//
// Kernels, spectra and factorizations are prepared once per code.
class WienerScorer {
 public:
  WienerScorer(const ApertureCode& code, const WienerConfig& cfg, int patch_size = kPatchSize);

  // Ties go to the smaller scale.
  ScaleEstimate estimate(const Grid& observed) const;

  const WienerConfig& config() const { return cfg_; }

 private:
  struct Candidate {
    ScaledKernel kernel;
    double log_det = 0.0;
    Eigen::LLT<Eigen::MatrixXd> covariance;  // valid mode only
  };
  WienerConfig cfg_;
  int patch_size_;
  std::vector<Candidate> candidates_;
};

ScaleEstimate estimate_patch_scale(const Grid& observed, const ApertureCode& code, const WienerConfig& cfg);

struct DepthEstimate {
  BlurSizeMap sizes;
  std::vector<PatchVote> votes;
  std::vector<ScaleEstimate> patches;  // parallel to votes
};

DepthEstimate estimate_depth_map_wiener(const GrayImage& image, const ApertureCode& code,
                                        const WienerConfig& cfg, int stride = 8,
                                        int max_kernel_size = 13, int threads = 1);

// CSV: row,col,s1,...,sK,best,confidence (selection scores per scale).
void write_residual_csv(std::ostream& out, const WienerConfig& cfg, const DepthEstimate& est);

}  // namespace cadepth
