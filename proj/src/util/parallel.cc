#include "psfm/util/parallel.h"

#include <algorithm>
#include <cstdlib>

namespace psfm {

int DefaultWorkerCount() {
  if (const char* env = std::getenv("PSFM_WORKERS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t num_threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (num_threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t + 1 < num_threads; ++t) threads.emplace_back(run);
  run();
  for (auto& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace psfm
