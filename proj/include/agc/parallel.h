#pragma once

#include <cstddef>
#include <functional>

namespace agc {

// Runs fn(i) for every i in [0, count) on up to `workers` threads. The first
// exception thrown (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace agc
