#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rsde::sim {

/// Evaluates fn(i) for i in [0, n) on up to `workers` threads and returns the
/// results indexed by i, so any reduction over the output is independent of
/// scheduling. If several calls throw, the exception of the smallest index is
/// rethrown.
template <class Fn>
auto run_batch(std::size_t n, std::size_t workers, Fn&& fn) {
    using Result = decltype(fn(std::size_t{0}));
    std::vector<Result> out(n);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(n, 1));

    std::exception_ptr error;
    std::size_t error_index = n;
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};
    constexpr std::size_t chunk = 64;

    const auto work = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                    return;
                }
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace rsde::sim
