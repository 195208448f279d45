#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace imm {

// Worker count: IMM_THREADS if set (>= 1), otherwise hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("IMM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Evaluates fn(i) for i in [0, count) on up to `workers` threads and returns
// the results in index order, so output never depends on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn, std::size_t workers = default_workers())
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<R>> slots(count);
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));

  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < count; i = next++) {
            try {
              slots[i].emplace(fn(i));
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              next = count;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace imm
