#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace evatrap {

/// Runs fn(lo, hi) over contiguous chunks of [0, n). threads == 0 uses the
/// hardware count; 1 runs inline. The first worker exception is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace evatrap
