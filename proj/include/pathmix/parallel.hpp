#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pathmix {

/**
 * Runs body(b) for b in [0, count), splitting work across `jobs` threads when
 * jobs > 1. Each call must confine its writes to slot b, and any randomness
 * must come from a stream derived from b, so output is identical under any
 * scheduling. The first exception thrown by a body is rethrown after join.
 */
inline void for_each_replicate(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int b = 0; b < count; ++b) body(b);
        return;
    }
    const int workers = std::min(jobs, count);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::mutex mu;
    std::exception_ptr first;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const int b = next.fetch_add(1);
                if (b >= count) return;
                try {
                    body(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first) first = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace pathmix
