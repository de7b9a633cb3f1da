#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace finwin {

/// Thread cap from FW_POMDP_THREADS (unset or 0 means hardware concurrency).
inline unsigned thread_budget() {
    const char* env = std::getenv("FW_POMDP_THREADS");
    long requested = 0;
    if (env != nullptr) requested = std::strtol(env, nullptr, 10);
    if (requested <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }
    return static_cast<unsigned>(requested);
}

/// Runs body(i) for i in [0, n). Bodies must write disjoint output slots;
/// iteration order is unspecified, so results must not depend on it.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned threads = thread_budget();
    if (threads <= 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace finwin
