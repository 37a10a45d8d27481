#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace triage {

// Process-wide worker budget, set once by the CLI --threads flag.
// 0 means "use hardware concurrency".
void set_thread_budget(unsigned threads);
unsigned thread_budget();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks whose
// boundaries depend only on n, never on the thread count, and every task
// writes to its own index, so results are thread-count invariant.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace triage
