#include "cadepth/wiener_depth.hpp"

#include "cadepth/errors.hpp"
#include "cadepth/fft.hpp"
#include "cadepth/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace cadepth {

DeconvBoundary parse_deconv_boundary(const std::string& name) {
  if (name == "cyclic") return DeconvBoundary::cyclic;
  if (name == "reflect") return DeconvBoundary::reflect;
  if (name == "valid") return DeconvBoundary::valid;
  throw InvalidConfiguration("unknown deconvolution boundary: " + name);
}

const char* to_string(DeconvBoundary b) {
  switch (b) {
    case DeconvBoundary::cyclic:
      return "cyclic";
    case DeconvBoundary::reflect:
      return "reflect";
    case DeconvBoundary::valid:
      return "valid";
  }
  return "?";
}

void WienerConfig::validate(int max_kernel_size) const {
  if (!(nsr >= 0.0)) throw InvalidConfiguration("wiener: nsr must be >= 0");
  if (scales.empty()) throw InvalidConfiguration("wiener: candidate scale list is empty");
  for (int s : scales)
    if (s < 1 || s % 2 == 0 || s > max_kernel_size)
      throw InvalidConfiguration("wiener: candidate scales must be odd and within [1, k]");
  if (!(texture_floor >= 0.0)) throw InvalidConfiguration("wiener: texture floor must be >= 0");
}

namespace {

CGrid wiener_filter(const CGrid& transfer, double nsr) {
  const Grid power = transfer.abs2();
  if (nsr == 0.0 && (power == 0.0).any())
    throw DivisionGuard("wiener: kernel spectrum has an exact zero and nsr is 0");
  return transfer.conjugate() / (power + nsr).cast<std::complex<double>>();
}

Grid reflect_extend(const Grid& patch, int pad) {
  const int h = static_cast<int>(patch.rows());
  const int w = static_cast<int>(patch.cols());
  Grid ext(h + 2 * pad, w + 2 * pad);
  for (int r = 0; r < ext.rows(); ++r)
    for (int c = 0; c < ext.cols(); ++c) ext(r, c) = patch(reflect_index(r - pad, h), reflect_index(c - pad, w));
  return ext;
}

// K K^T + nsr I for the valid-window blur operator of a p x p patch. Entry
// (a, b) is the kernel autocorrelation at the offset between pixels a and b.
Eigen::MatrixXd valid_covariance(const Grid& kernel, int p, double nsr) {
  const int s = static_cast<int>(kernel.rows());
  const int span = 2 * s - 1;
  Grid autocorr = Grid::Zero(span, span);
  for (int dr = -(s - 1); dr < s; ++dr)
    for (int dc = -(s - 1); dc < s; ++dc) {
      double acc = 0.0;
      for (int i = std::max(0, -dr); i < std::min(s, s - dr); ++i)
        for (int j = std::max(0, -dc); j < std::min(s, s - dc); ++j) acc += kernel(i, j) * kernel(i + dr, j + dc);
      autocorr(dr + s - 1, dc + s - 1) = acc;
    }
  const int m = p * p;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    const int ar = a / p, ac = a % p;
    for (int br = std::max(0, ar - s + 1); br < std::min(p, ar + s); ++br)
      for (int bc = std::max(0, ac - s + 1); bc < std::min(p, ac + s); ++bc)
        cov(a, br * p + bc) = autocorr(ar - br + s - 1, ac - bc + s - 1);
    cov(a, a) += nsr;
  }
  return cov;
}

Eigen::LLT<Eigen::MatrixXd> factor_valid(const Grid& kernel, int p, double nsr) {
  Eigen::LLT<Eigen::MatrixXd> llt(valid_covariance(kernel, p, nsr));
  if (llt.info() != Eigen::Success)
    throw DivisionGuard("wiener: valid-window blur operator is singular and nsr is 0");
  return llt;
}

// Adjoint of the valid-window blur: spreads a p x p field onto the
// (p + s - 1)^2 sharp region.
Grid valid_adjoint(const Grid& field, const Grid& kernel) {
  const int p = static_cast<int>(field.rows());
  const int s = static_cast<int>(kernel.rows());
  Grid out = Grid::Zero(p + s - 1, p + s - 1);
  // y(r, c) = sum_{i,j} K(i, j) x(r + s - 1 - i, c + s - 1 - j)
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c)
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) out(r + s - 1 - i, c + s - 1 - j) += kernel(i, j) * field(r, c);
  return out;
}

Grid solve_valid(const Eigen::LLT<Eigen::MatrixXd>& llt, const Grid& y) {
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), y.size());
  const Eigen::VectorXd alpha = llt.solve(yv);
  Grid out(y.rows(), y.cols());
  Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = alpha;
  return out;
}

}  // namespace

Grid wiener_deconvolve(const Grid& patch, const ScaledKernel& kernel, double nsr, DeconvBoundary boundary) {
  if (!(nsr >= 0.0)) throw InvalidArgument("wiener: nsr must be >= 0");
  const int h = static_cast<int>(patch.rows());
  const int w = static_cast<int>(patch.cols());
  if (kernel.size > h || kernel.size > w) throw InvalidArgument("kernel larger than patch");
  switch (boundary) {
    case DeconvBoundary::cyclic: {
      const CGrid filter = wiener_filter(fft::kernel_transfer(kernel.values, h, w), nsr);
      return fft::inverse_real(filter * fft::forward(patch));
    }
    case DeconvBoundary::reflect: {
      const int pad = std::max(std::max(h, w) / 2, kernel.size);
      const Grid ext = reflect_extend(patch, pad);
      const int eh = static_cast<int>(ext.rows());
      const int ew = static_cast<int>(ext.cols());
      const CGrid filter = wiener_filter(fft::kernel_transfer(kernel.values, eh, ew), nsr);
      return fft::inverse_real(filter * fft::forward(ext)).block(pad, pad, h, w);
    }
    case DeconvBoundary::valid: {
      if (h != w) throw InvalidArgument("valid-mode deconvolution needs a square patch");
      const Grid alpha = solve_valid(factor_valid(kernel.values, h, nsr), patch);
      const int c = kernel.size / 2;
      return valid_adjoint(alpha, kernel.values).block(c, c, h, w);
    }
  }
  return patch;
}

WienerScorer::WienerScorer(const ApertureCode& code, const WienerConfig& cfg, int patch_size)
    : cfg_(cfg), patch_size_(patch_size) {
  for (int s : cfg_.scales) {
    if (s > patch_size) throw InvalidArgument("candidate kernel larger than patch");
    Candidate cand;
    cand.kernel = scale_code(code, s);
    if (cfg_.boundary == DeconvBoundary::valid) {
      cand.covariance = factor_valid(cand.kernel.values, patch_size, cfg_.nsr);
      cand.log_det = 2.0 * cand.covariance.matrixLLT().diagonal().array().log().sum();
    } else {
      const Grid power = fft::kernel_transfer(cand.kernel.values, patch_size, patch_size).abs2();
      cand.log_det = (power + cfg_.nsr).max(std::numeric_limits<double>::min()).log().sum();
    }
    candidates_.push_back(std::move(cand));
  }
}

ScaleEstimate WienerScorer::estimate(const Grid& observed) const {
  if (observed.rows() != patch_size_ || observed.cols() != patch_size_)
    throw InvalidArgument("observed patch does not match the scorer's patch size");
  const double m = static_cast<double>(observed.size());
  const Grid centered = observed - observed.mean();
  const double stddev = std::sqrt(centered.square().sum() / m);
  const double nsr = cfg_.nsr;
  const double tiny = std::numeric_limits<double>::min();

  ScaleEstimate est;
  est.confident = stddev >= cfg_.texture_floor;
  for (const Candidate& cand : candidates_) {
    double r2 = 0.0;
    double data = 0.0;
    if (cfg_.boundary == DeconvBoundary::valid) {
      // alpha = (K K^T + nsr I)^-1 y, residual = -nsr alpha, and
      // |r|^2 / nsr + |x|^2 = y . alpha.
      const Grid alpha = solve_valid(cand.covariance, centered);
      r2 = nsr * nsr * alpha.square().sum();
      data = (centered * alpha).sum();
    } else {
      const Boundary reblur = cfg_.boundary == DeconvBoundary::cyclic ? Boundary::cyclic : Boundary::reflect;
      const Grid restored = wiener_deconvolve(centered, cand.kernel, nsr, cfg_.boundary);
      r2 = (convolve_patch(restored, cand.kernel, reblur) - centered).square().sum();
      data = (nsr > 0 ? r2 / nsr : 0.0) + restored.square().sum();
    }
    est.residuals.push_back(std::sqrt(r2));
    est.scores.push_back((m - 1.0) * std::log(std::max(data, tiny)) + cand.log_det);
  }
  size_t best = 0;
  for (size_t i = 1; i < est.scores.size(); ++i) {
    const bool better = est.scores[i] < est.scores[best] ||
                        (est.scores[i] == est.scores[best] && cfg_.scales[i] < cfg_.scales[best]);
    if (better) best = i;
  }
  est.best_scale = cfg_.scales[best];
  return est;
}

ScaleEstimate estimate_patch_scale(const Grid& observed, const ApertureCode& code, const WienerConfig& cfg) {
  if (observed.rows() != observed.cols()) throw InvalidArgument("patch must be square");
  return WienerScorer(code, cfg, static_cast<int>(observed.rows())).estimate(observed);
}

DepthEstimate estimate_depth_map_wiener(const GrayImage& image, const ApertureCode& code,
                                        const WienerConfig& cfg, int stride, int max_kernel_size,
                                        int threads) {
  cfg.validate(max_kernel_size);
  if (image.rows() < kPatchSize || image.cols() < kPatchSize)
    throw InvalidArgument("image smaller than the patch size");
  const WienerScorer scorer(code, cfg, kPatchSize);
  const auto patches = extract_patches(image, stride);
  DepthEstimate out;
  out.patches.resize(patches.size());
  parallel_for(patches.size(), threads, [&](size_t i) { out.patches[i] = scorer.estimate(patches[i].patch); });
  out.votes.reserve(patches.size());
  for (size_t i = 0; i < patches.size(); ++i)
    out.votes.push_back({patches[i].row, patches[i].col, out.patches[i].best_scale, out.patches[i].confident});
  out.sizes = fuse_votes(static_cast<int>(image.rows()), static_cast<int>(image.cols()), kPatchSize,
                         out.votes, max_kernel_size);
  return out;
}

void write_residual_csv(std::ostream& out, const WienerConfig& cfg, const DepthEstimate& est) {
  out << "row,col";
  for (int s : cfg.scales) out << ",s" << s;
  out << ",best,confidence\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (size_t i = 0; i < est.votes.size(); ++i) {
    out << est.votes[i].row << ',' << est.votes[i].col;
    for (double v : est.patches[i].scores) out << ',' << v;
    out << ',' << est.patches[i].best_scale << ',' << (est.patches[i].confident ? "high" : "low") << '\n';
  }
}

}  // namespace cadepth
