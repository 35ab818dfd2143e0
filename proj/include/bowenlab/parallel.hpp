#pragma once

#include <cstddef>
#include <functional>

namespace bowenlab {

// Worker cap: min(hardware, BOWEN_LAB_THREADS when set).
int worker_count();

// Runs fn(0..n-1) across workers. Tasks must write only to their own output
// slots; results are then independent of scheduling, so output is identical
// for any worker count. The first task exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace bowenlab
