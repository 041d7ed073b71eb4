#pragma once

#include <cstdint>
#include <functional>

namespace qwloc {

// Worker count: QWLOC_THREADS if set, otherwise hardware concurrency.
int default_thread_count();

// Static range split across workers. Results must be written to
// per-index slots; then the outcome is independent of scheduling.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  int threads = 0);

}  // namespace qwloc
