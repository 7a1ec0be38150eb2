#pragma once

#include <cstddef>
#include <functional>

namespace anchor_forge {

/// Worker count from ANCHOR_FORGE_THREADS; 0 or unset means one per hardware
/// thread.
std::size_t configured_threads();

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = configured).
/// Indices are handed out in contiguous blocks; the first exception thrown by
/// any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace anchor_forge
