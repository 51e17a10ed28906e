#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spdc {

namespace detail {
inline std::atomic<std::size_t> worker_limit{0};
}

// Caps the pool size of parallel_for; 0 restores the hardware default.
inline void set_worker_limit(std::size_t n) { detail::worker_limit = n; }

// Calls fn(i) for i in [0, n) on a small worker pool. Callers write results
// into slot i, so output order never depends on scheduling. The exception
// of the lowest failing index is rethrown, as a serial loop would.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const std::size_t cap = detail::worker_limit; cap > 0) hw = std::min(hw, cap);
    const std::size_t n_workers = std::min(hw, n);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace spdc
