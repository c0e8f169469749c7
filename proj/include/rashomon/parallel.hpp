#pragma once

#include <cstddef>
#include <functional>

namespace rashomon {

/// Worker count used when a caller passes 0: the RASHOMON_THREADS
/// environment variable if set, otherwise the hardware concurrency.
std::size_t default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Work items are claimed dynamically, so `body` must write only to the slot
/// it owns; callers reduce in index order afterwards. Nested calls from inside
/// a worker run serially. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rashomon
