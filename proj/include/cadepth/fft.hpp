#pragma once

#include "cadepth/grid.hpp"

namespace cadepth::fft {

// Unnormalized forward 2D DFT: F(u,v) = sum_{m,n} x(m,n) e^{-2 pi i (um/H + vn/W)}.
CGrid forward(const Grid& x);
CGrid forward(const CGrid& x);

// Unnormalized inverse 2D DFT (sign +). inverse(forward(x)) == H*W*x.
CGrid inverse(const CGrid& x);

// Real part of the normalized inverse transform.
Grid inverse_real(const CGrid& x);

// Circularly shift so the zero-frequency bin moves to (H/2, W/2).
template <typename G>
G fftshift(const G& g) {
  const int h = static_cast<int>(g.rows());
  const int w = static_cast<int>(g.cols());
  G out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out((r + h / 2) % h, (c + w / 2) % w) = g(r, c);
  return out;
}

// Place a centered odd-sized kernel on an h x w grid with its center at the
// origin (wrap-around), so multiplying spectra gives a same-size centered
// cyclic convolution.
Grid embed_kernel(const Grid& kernel, int h, int w);

// DFT of embed_kernel(kernel, h, w).
CGrid kernel_transfer(const Grid& kernel, int h, int w);

}  // namespace cadepth::fft
