#pragma once

#include <cstddef>
#include <functional>

namespace paultrap {

/// Runs fn(0) ... fn(n - 1) on up to `jobs` threads. Work items are claimed in
/// index order; the first exception thrown by any item is rethrown after all
/// threads have joined.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace paultrap
