#pragma once

#include <cstddef>
#include <functional>

namespace cadepth {

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Work items are independent; callers that reduce results do
// so afterwards in index order, which keeps outputs independent of the
// thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// Process-wide default used when a module is not given an explicit count.
void set_default_threads(int threads);
int default_threads();

}  // namespace cadepth
