#pragma once

#include <cstddef>
#include <functional>

namespace vocabhull {

// Process-wide cap on worker threads (0 = hardware concurrency).
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Calls fn(i) for i in [0, count) over contiguous chunks. Callers write into
// per-index slots and reduce afterwards in index order, so results never
// depend on the thread count. The first exception (by chunk order) is
// rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t min_chunk = 1);

}  // namespace vocabhull
