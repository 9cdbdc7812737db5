#include "cadepth/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace cadepth::fft {
namespace {

// FFTW planning is not thread-safe, execution is. Plans are created once per
// (shape, direction) under a lock and executed through the new-array API on
// fftw_malloc'd buffers so alignment always matches the planning buffers.
struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<size_t>(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    plans.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

struct FftwBuffer {
  fftw_complex* data;
  explicit FftwBuffer(size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

CGrid run(const CGrid& x, int sign) {
  const int h = static_cast<int>(x.rows());
  const int w = static_cast<int>(x.cols());
  const size_t n = static_cast<size_t>(h) * w;
  FftwBuffer buf(n);
  std::memcpy(buf.data, x.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(cache().get(h, w, sign), buf.data, buf.data);
  CGrid out(h, w);
  std::memcpy(static_cast<void*>(out.data()), buf.data, n * sizeof(fftw_complex));
  return out;
}

}  // namespace

CGrid forward(const Grid& x) { return run(x.cast<std::complex<double>>(), FFTW_FORWARD); }

CGrid forward(const CGrid& x) { return run(x, FFTW_FORWARD); }

CGrid inverse(const CGrid& x) { return run(x, FFTW_BACKWARD); }

Grid inverse_real(const CGrid& x) {
  return inverse(x).real() / static_cast<double>(x.size());
}

Grid embed_kernel(const Grid& kernel, int h, int w) {
  Grid out = Grid::Zero(h, w);
  const int ks = static_cast<int>(kernel.rows());
  const int c = ks / 2;
  for (int i = 0; i < ks; ++i)
    for (int j = 0; j < ks; ++j) out(wrap_index(i - c, h), wrap_index(j - c, w)) += kernel(i, j);
  return out;
}

CGrid kernel_transfer(const Grid& kernel, int h, int w) {
  return forward(embed_kernel(kernel, h, w));
}

}  // namespace cadepth::fft
