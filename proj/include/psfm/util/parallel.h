#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace psfm {

// Worker count from PSFM_WORKERS if set and positive, else hardware
// concurrency (at least 1).
int DefaultWorkerCount();

// Runs fn(i) for i in [0, n) on at most `workers` threads. Work items are
// claimed dynamically. The first exception thrown by any item is rethrown
// after all threads join.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace psfm
