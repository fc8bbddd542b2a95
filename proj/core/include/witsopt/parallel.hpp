#pragma once

#include <cstddef>
#include <functional>

namespace witsopt {

/// Number of worker threads to use. A positive request wins; otherwise the
/// WITSOPT_THREADS environment variable (0 = auto), otherwise the hardware
/// concurrency.
std::size_t resolve_threads(std::size_t requested = 0);

/// Calls task(i) for every i in [0, count) on up to `threads` workers.
/// Tasks are handed out dynamically, so callers must make results depend only
/// on the index, never on which worker ran it. The first exception thrown by
/// a task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace witsopt
