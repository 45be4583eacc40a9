// Fixed-partition parallel map. Work item i always produces result i, so the
// output does not depend on the worker count or scheduling order.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace raglsa {

template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t count, std::size_t workers, Fn&& fn) {
  std::vector<Result> results(count);
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();  // joins
  if (error) std::rethrow_exception(error);
  return results;
}

/// Pairwise tree reduction in index order; `merge(a, b)` folds b into a.
template <typename T, typename Merge>
T tree_reduce(std::vector<T> items, Merge&& merge) {
  if (items.empty()) return T{};
  for (std::size_t width = 1; width < items.size(); width *= 2)
    for (std::size_t i = 0; i + width < items.size(); i += 2 * width) merge(items[i], items[i + width]);
  return items.front();
}

}  // namespace raglsa
