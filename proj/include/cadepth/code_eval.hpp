#pragma once

#include "cadepth/optics.hpp"

#include <iosfwd>
#include <vector>

namespace cadepth {

// Gaussian image model, diagonal in the DFT basis: per-frequency signal
// variance plus a white noise floor.
struct PriorSpectrum {
  Grid signal_variance;  // P x P, unshifted DFT layout
  double noise_variance = 1e-4;

  // sigma_x(nu) = amplitude / (|Gx(nu)|^2 + |Gy(nu)|^2 + epsilon) with
  // first-difference derivative filters; noise_variance = noise_sigma^2.
  static PriorSpectrum gradient_prior(int patch_size = 32, double amplitude = 1.0,
                                      double epsilon = 1e-6, double noise_sigma = 0.01);

  void validate() const;
};

// |C~(s)(nu)|^2 sigma_x(nu) + eta^2 over the prior's grid.
Grid blurred_spectrum(const ApertureCode& code, int s, const PriorSpectrum& prior);

// KL(N(0, diag sigma_s1) || N(0, diag sigma_s2)), in nats.
double kl_between_scales(const ApertureCode& code, int s1, int s2, const PriorSpectrum& prior);

struct KLReport {
  std::vector<int> scales;
  Eigen::MatrixXd kl;  // kl(i, j) = KL(scales[i] || scales[j])
  double score_min = 0.0;
  double score_mean = 0.0;
};

KLReport kl_report(const ApertureCode& code, const std::vector<int>& scales, const PriorSpectrum& prior);

// CSV: header row of scales, one matrix row per line, then
// "score_min,<v>" and "score_mean,<v>".
void write_kl_csv(std::ostream& out, const KLReport& report);

}  // namespace cadepth
