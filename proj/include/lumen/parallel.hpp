#pragma once

#include <cstddef>
#include <functional>

namespace lumen {

/// Worker count from LUMEN_REM_THREADS (0 or unset means hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads in contiguous
/// chunks. The body must only write to slots owned by its index; results are
/// then independent of the worker count. The first exception thrown by any
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace lumen
