#include "cadepth/optics.hpp"

#include "cadepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cadepth {

void CameraConfig::validate() const {
  if (!(focal_length_mm > 0) || !(pixel_pitch_um > 0) || !(f_number > 0))
    throw InvalidConfiguration("camera: focal length, pixel pitch and f-number must be positive");
  if (!(focus_distance_m * 1e3 > focal_length_mm))
    throw InvalidConfiguration("camera: focus distance must exceed the focal length");
  if (max_kernel_size < 1 || max_kernel_size % 2 == 0)
    throw InvalidConfiguration("camera: max kernel size must be odd and >= 1");
}

std::vector<int> all_sizes(int max_kernel_size) {
  std::vector<int> out;
  for (int s = 1; s <= max_kernel_size; s += 2) out.push_back(s);
  return out;
}

ApertureCode::ApertureCode(Grid values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() % 2 == 0)
    throw InvalidArgument("aperture code must be square with odd side");
  if (!values_.allFinite() || values_.minCoeff() < 0.0 || values_.maxCoeff() > 1.0)
    throw InvalidArgument("aperture code values must lie in [0,1]");
  if (!(values_.maxCoeff() > 0.0)) throw DegenerateKernel("aperture code is fully opaque");
}

ApertureCode ApertureCode::open(int side) { return ApertureCode(Grid::Ones(side, side)); }

bool ApertureCode::is_binary() const {
  return (values_ == 0.0 || values_ == 1.0).all();
}

double blur_radius_pixels(double depth_m, const CameraConfig& cam) {
  cam.validate();
  const double f = cam.focal_length_mm * 1e-3;
  if (!(depth_m > f)) {
    std::ostringstream msg;
    msg << "depth " << depth_m << " m does not exceed the focal length";
    throw InvalidConfiguration(msg.str());
  }
  const double aperture = f / cam.f_number;
  const double df = cam.focus_distance_m;
  const double v_focus = f * df / (df - f);
  const double v = f * depth_m / (depth_m - f);
  const double blur_diameter = aperture * std::abs(v_focus - v) / v;
  return 0.5 * blur_diameter / (cam.pixel_pitch_um * 1e-6);
}

int depth_to_blur_size(double depth_m, const CameraConfig& cam) {
  const double r = blur_radius_pixels(depth_m, cam);
  // std::round rounds half away from zero. Clamp before the cast so absurd
  // depths cannot overflow int.
  const double rounded = std::min(std::round(r), static_cast<double>(cam.max_kernel_size));
  const int s = 2 * static_cast<int>(rounded) + 1;
  return std::clamp(s, 1, cam.max_kernel_size);
}

Eigen::MatrixXd area_resample_matrix(int n, int s) {
  if (n < 1 || s < 1) throw InvalidArgument("resample sizes must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s, n);
  const double width = static_cast<double>(n) / s;
  for (int i = 0; i < s; ++i) {
    const double lo = i * width;
    const double hi = (i + 1) * width;
    for (int j = static_cast<int>(std::floor(lo)); j < n && j < hi; ++j) {
      const double overlap = std::min(hi, j + 1.0) - std::max(lo, static_cast<double>(j));
      if (overlap > 0) a(i, j) = overlap / width;
    }
  }
  return a;
}

Grid resample(const Grid& values, int s) {
  const Eigen::MatrixXd a = area_resample_matrix(static_cast<int>(values.rows()), s);
  const Eigen::MatrixXd c = values.matrix();
  return (a * c * a.transpose()).array();
}

ScaledKernel scale_grid(const Grid& values, int s) {
  if (s < 1 || s % 2 == 0) throw InvalidArgument("kernel size must be odd and >= 1");
  Grid r = resample(values, s);
  const double total = r.sum();
  if (!(total > 0.0)) throw DegenerateKernel("scaled kernel has zero total transmission");
  return ScaledKernel{s, r / total};
}

ScaledKernel scale_code(const ApertureCode& code, int s) { return scale_grid(code.values(), s); }

ApertureCode read_code(std::istream& in) {
  int n = 0;
  if (!(in >> n) || n < 1) throw IoError("aperture code: missing or invalid side length");
  Grid g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (!(in >> g(r, c))) throw IoError("aperture code: truncated value grid");
  return ApertureCode(std::move(g));
}

ApertureCode load_code(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open aperture code file: " + path.string());
  try {
    return read_code(in);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_code(std::ostream& out, const ApertureCode& code) {
  const Grid& v = code.values();
  out << v.rows() << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < v.rows(); ++r) {
    for (int c = 0; c < v.cols(); ++c) out << (c ? " " : "") << v(r, c);
    out << '\n';
  }
}

void save_code(const std::filesystem::path& path, const ApertureCode& code) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write aperture code file: " + path.string());
  write_code(out, code);
}

}  // namespace cadepth

namespace cadepth {

double depth_for_blur_radius(double radius_px, const CameraConfig& cam, bool far_side) {
  cam.validate();
  if (!(radius_px >= 0.0)) throw InvalidConfiguration("blur radius must be >= 0");
  const double f = cam.focal_length_mm * 1e-3;
  const double aperture = f / cam.f_number;
  const double df = cam.focus_distance_m;
  const double v_focus = f * df / (df - f);
  // blur diameter c = A |v_f - v| / v  =>  v = v_f / (1 +- c / A)
  const double ratio = 2.0 * radius_px * cam.pixel_pitch_um * 1e-6 / aperture;
  const double denom = far_side ? 1.0 + ratio : 1.0 - ratio;
  if (!(denom > 0.0)) throw InvalidConfiguration("blur radius unreachable in front of the focal plane");
  const double v = v_focus / denom;
  if (!(v > f)) throw InvalidConfiguration("blur radius unreachable beyond the focal plane");
  return f * v / (v - f);
}

}  // namespace cadepth
