#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace islp {

inline std::size_t default_threads()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) over contiguous blocks. Each index is written by
/// exactly one thread, so results are independent of the thread count.
/// threads == 0 means default_threads().
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    if (threads == 0)
        threads = default_threads();
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace islp
