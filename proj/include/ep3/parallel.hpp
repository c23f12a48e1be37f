#pragma once

#include <cstddef>
#include <functional>

namespace ep3 {

/// Worker count: hardware concurrency, capped by EP3_ATLAS_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. The first
/// exception (lowest index) is rethrown after all workers finish, so failures
/// are reported deterministically.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ep3
