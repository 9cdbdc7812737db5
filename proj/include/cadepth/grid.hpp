#pragma once

#include <Eigen/Core>

#include <complex>

namespace cadepth {

// Row-major 2D grids. Row-major layout matches the FFTW convention and the
// on-disk text/PGM formats, so buffers can be handed over without copies.
using Grid = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CGrid =
    Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntGrid = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Index with wrap-around for cyclic boundaries.
inline int wrap_index(int i, int n) {
  const int m = i % n;
  return m < 0 ? m + n : m;
}

// Whole-sample symmetric reflection: -1 -> 0, n -> n-1 (edge pixel repeated).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = wrap_index(i, period);
  return m < n ? m : period - 1 - m;
}

}  // namespace cadepth
