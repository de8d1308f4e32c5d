#pragma once

#include <cstddef>
#include <functional>

namespace drt {

// Runs body(i) for i in [0, n) on up to `workers` threads. Work items are
// independent; results must be written to per-index slots. workers == 0 picks
// the hardware concurrency. The first exception thrown by any item is
// rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace drt
