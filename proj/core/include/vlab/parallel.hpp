#pragma once

#include <cstddef>
#include <functional>

namespace vlab {

// Worker count: VLAB_THREADS if set and positive, else the hardware concurrency.
unsigned thread_count();

// Calls body(i) for i in [0, count) on up to thread_count() threads. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace vlab
