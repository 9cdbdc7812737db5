#include "cadepth/code_eval.hpp"

#include "cadepth/errors.hpp"
#include "cadepth/fft.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace cadepth {

PriorSpectrum PriorSpectrum::gradient_prior(int patch_size, double amplitude, double epsilon,
                                            double noise_sigma) {
  PriorSpectrum prior;
  prior.signal_variance.resize(patch_size, patch_size);
  for (int u = 0; u < patch_size; ++u) {
    const double sy = std::sin(std::numbers::pi * u / patch_size);
    for (int v = 0; v < patch_size; ++v) {
      const double sx = std::sin(std::numbers::pi * v / patch_size);
      // |1 - e^{-i w}|^2 = 4 sin^2(w / 2)
      prior.signal_variance(u, v) = amplitude / (4.0 * sx * sx + 4.0 * sy * sy + epsilon);
    }
  }
  prior.noise_variance = noise_sigma * noise_sigma;
  prior.validate();
  return prior;
}

void PriorSpectrum::validate() const {
  if (signal_variance.size() == 0 || !(signal_variance.minCoeff() > 0.0))
    throw InvalidConfiguration("prior signal variance must be positive everywhere");
  if (!(noise_variance > 0.0)) throw InvalidConfiguration("prior noise variance must be positive");
}

Grid blurred_spectrum(const ApertureCode& code, int s, const PriorSpectrum& prior) {
  prior.validate();
  const int p = static_cast<int>(prior.signal_variance.rows());
  const ScaledKernel k = scale_code(code, s);
  if (k.size > p) throw InvalidArgument("kernel larger than the prior grid");
  const Grid power = fft::kernel_transfer(k.values, p, p).abs2();
  return power * prior.signal_variance + prior.noise_variance;
}

namespace {

double kl_diag(const Grid& a, const Grid& b) {
  const Grid ratio = a / b;
  return 0.5 * (ratio - ratio.log() - 1.0).sum();
}

}  // namespace

double kl_between_scales(const ApertureCode& code, int s1, int s2, const PriorSpectrum& prior) {
  if (s1 == s2) return 0.0;
  return kl_diag(blurred_spectrum(code, s1, prior), blurred_spectrum(code, s2, prior));
}

KLReport kl_report(const ApertureCode& code, const std::vector<int>& scales, const PriorSpectrum& prior) {
  if (scales.size() < 2) throw InvalidArgument("kl_report needs at least two scales");
  std::vector<Grid> spectra;
  spectra.reserve(scales.size());
  for (int s : scales) spectra.push_back(blurred_spectrum(code, s, prior));

  const auto n = static_cast<Eigen::Index>(scales.size());
  KLReport report;
  report.scales = scales;
  report.kl = Eigen::MatrixXd::Zero(n, n);
  double lo = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = scales[i] == scales[j] ? 0.0 : kl_diag(spectra[i], spectra[j]);
      report.kl(i, j) = v;
      lo = std::min(lo, v);
      total += v;
    }
  }
  report.score_min = lo;
  report.score_mean = total / static_cast<double>(n * (n - 1));
  return report;
}

void write_kl_csv(std::ostream& out, const KLReport& report) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (size_t i = 0; i < report.scales.size(); ++i) out << (i ? "," : "") << report.scales[i];
  out << '\n';
  for (Eigen::Index i = 0; i < report.kl.rows(); ++i) {
    for (Eigen::Index j = 0; j < report.kl.cols(); ++j) out << (j ? "," : "") << report.kl(i, j);
    out << '\n';
  }
  out << "score_min," << report.score_min << '\n';
  out << "score_mean," << report.score_mean << '\n';
}

}  // namespace cadepth
