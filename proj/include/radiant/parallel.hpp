#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace radiant {

namespace detail {
inline std::atomic<int> &thread_setting() {
    static std::atomic<int> threads{0};
    return threads;
}
} // namespace detail

/// Worker count used by the parallel loops; 0 means hardware concurrency.
inline void set_threads(int threads) { detail::thread_setting() = std::max(0, threads); }

inline int num_threads() {
    const int t = detail::thread_setting();
    if (t > 0)
        return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(item, worker) for item in [0, n). Item k always goes to worker
/// k % workers, so the work split does not depend on timing. The first
/// exception (lowest worker) is rethrown after all workers finish.
template <class F>
void parallel_for(std::ptrdiff_t n, F &&f, int workers = 0) {
    if (n <= 0)
        return;
    if (workers <= 0)
        workers = num_threads();
    workers = static_cast<int>(std::min<std::ptrdiff_t>(workers, n));
    if (workers == 1) {
        for (std::ptrdiff_t k = 0; k < n; ++k)
            f(k, 0);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::ptrdiff_t k = w; k < n; k += workers)
                    f(k, w);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto &t : pool)
        t.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace radiant
