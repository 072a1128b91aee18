#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chemo {

namespace detail {
inline std::atomic<unsigned>& thread_setting()
{
    static std::atomic<unsigned> n{0};
    return n;
}
} // namespace detail

/// 0 means "one per hardware thread".
inline void set_default_threads(unsigned n) { detail::thread_setting() = n; }

inline unsigned default_threads()
{
    const unsigned n = detail::thread_setting();
    if (n > 0)
        return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(i) for i in [0, count) on up to `threads` workers. Indices are handed out
/// dynamically; callers write results by index so output order never depends on scheduling.
/// The first exception thrown by any f(i) is rethrown after all workers finish.
template <typename F>
void parallel_for(std::size_t count, F&& f, unsigned threads = default_threads())
{
    threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        f(i);
                    }
                    catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    }
                }
            });
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace chemo
