#pragma once

#include <cstddef>
#include <functional>

namespace cmc {

// Worker count: CMC_THREADS if set (>= 1), otherwise hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is
// visited exactly once; results must be written to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cmc
