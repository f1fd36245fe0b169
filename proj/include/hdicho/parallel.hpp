#pragma once

#include <cstddef>
#include <functional>

namespace hdicho {

/// Worker count: HDICHO_THREADS when set, else the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each index
/// must write only its own output slot; the first failing index (lowest i)
/// has its exception rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hdicho
