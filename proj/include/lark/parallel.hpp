#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lark {

/// Calls fn(i) for i in [0, n) on up to `limit` threads. Results must be
/// written to per-index slots by the caller so order never depends on timing.
/// The first exception thrown is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
    const std::size_t workers = std::min(n, std::max<std::size_t>(limit, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace lark
