#pragma once

#include <cstddef>
#include <functional>

namespace smash {

// Worker count from SMASH_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index must write only to its own
// output slot; results are then independent of scheduling. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace smash
