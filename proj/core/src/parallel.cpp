#include "asclens/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace asclens {

namespace {
std::atomic<std::size_t> g_thread_limit{0};
thread_local bool t_inside_worker = false;

struct WorkerScope {
  bool previous;
  WorkerScope() : previous(t_inside_worker) { t_inside_worker = true; }
  ~WorkerScope() { t_inside_worker = previous; }
};
}

void set_thread_limit(std::size_t threads) noexcept { g_thread_limit = threads; }

std::size_t thread_limit() noexcept {
  const std::size_t limit = g_thread_limit.load();
  if (limit != 0) return limit;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  // Nested calls run inline so the pool never exceeds the thread limit.
  const std::size_t workers = t_inside_worker ? 1 : std::min(thread_limit(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    WorkerScope scope;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace asclens
