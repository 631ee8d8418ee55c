#pragma once

#include <cstddef>
#include <functional>

namespace dreid {

/// Runs fn(0) .. fn(n - 1) on up to `threads` workers (0 = hardware
/// concurrency). Every index runs even if another throws; afterwards the
/// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace dreid
