#pragma once

#include <cstddef>
#include <functional>

namespace nirattack {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). The first exception thrown is rethrown after all workers
/// have stopped; remaining indices are skipped.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace nirattack
