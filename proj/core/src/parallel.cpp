#include "ksmz/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ksmz {

int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_blocks(std::size_t n, std::size_t block_size, int jobs,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& run_block) {
  if (n == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  if (jobs <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      run_block(b, b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        run_block(b, b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n_blocks));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  parallel_blocks(n, 1, jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) f(i);
  });
}

}  // namespace ksmz
