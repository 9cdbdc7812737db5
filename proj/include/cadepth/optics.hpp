#pragma once

#include "cadepth/grid.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace cadepth {

// Thin-lens camera. Units follow lens-datasheet conventions; conversions to
// meters happen inside depth_to_blur_size.
struct CameraConfig {
  double focal_length_mm = 25.0;
  double pixel_pitch_um = 8.0;
  double f_number = 1.4;
  double focus_distance_m = 1.0;
  int max_kernel_size = 13;

  // Throws InvalidConfiguration if any invariant is violated.
  void validate() const;

  // Number of blur-size classes {1, 3, ..., max_kernel_size}.
  int num_classes() const { return (max_kernel_size + 1) / 2; }
};

// Class index <-> odd kernel size.
inline int size_to_class(int s) { return (s - 1) / 2; }
inline int class_to_size(int c) { return 2 * c + 1; }

// All odd sizes 1..k.
std::vector<int> all_sizes(int max_kernel_size);

// N x N aperture transmission pattern with entries in [0,1].
class ApertureCode {
 public:
  // Throws InvalidArgument unless values is square with odd side and entries
  // in [0,1]; throws DegenerateKernel if every entry is zero.
  explicit ApertureCode(Grid values);

  static ApertureCode open(int side = 11);

  int side() const { return static_cast<int>(values_.rows()); }
  const Grid& values() const { return values_; }
  bool is_binary() const;

 private:
  Grid values_;
};

// Unit-sum s x s blur kernel.
struct ScaledKernel {
  int size = 1;
  Grid values;
};

// Pixel blur size for a scene point at `depth_m`.
int depth_to_blur_size(double depth_m, const CameraConfig& cam);

// Blur radius in pixels before rounding (r / pixel pitch).
double blur_radius_pixels(double depth_m, const CameraConfig& cam);

// Area-weighted 1D resampling operator (s x n). Row i averages the input
// cells covered by output cell i, weighted by overlap length.
Eigen::MatrixXd area_resample_matrix(int n, int s);

// Linear pre-normalization resampling of an n x n grid to s x s.
Grid resample(const Grid& values, int s);

// Resample then normalize to unit sum.
ScaledKernel scale_code(const ApertureCode& code, int s);

// Same as scale_code but for raw continuous values (used by the learner,
// which may transiently hold values outside an ApertureCode's contract).
ScaledKernel scale_grid(const Grid& values, int s);

// Text format: first line N, then N rows of N space-separated values.
ApertureCode read_code(std::istream& in);
ApertureCode load_code(const std::filesystem::path& path);
void write_code(std::ostream& out, const ApertureCode& code);
void save_code(const std::filesystem::path& path, const ApertureCode& code);

}  // namespace cadepth

namespace cadepth {

// Inverse of blur_radius_pixels on one side of the focal plane: the depth
// whose blur radius is `radius_px`. Throws InvalidConfiguration if the
// radius is unreachable on the requested side.
double depth_for_blur_radius(double radius_px, const CameraConfig& cam, bool far_side);

}  // namespace cadepth
