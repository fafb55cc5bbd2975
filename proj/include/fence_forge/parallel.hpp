#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ff {

/// Worker cap: FENCE_FORGE_THREADS when set to a positive integer, else the
/// hardware concurrency.
inline unsigned worker_count() {
    if (const char* e = std::getenv("FENCE_FORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : h;
}

/// Calls f(i) for i in [0, n) over contiguous chunks. f must only write to
/// per-index state. The first exception thrown by any worker is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    unsigned w = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n / 64, 1));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    std::size_t chunk = (n + w - 1) / w;
    for (unsigned t = 0; t < w; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lk(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace ff
