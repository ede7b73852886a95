#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace uotkit {

// Upper bound on worker threads for per-element maps; 0 means hardware concurrency.
void set_thread_limit(unsigned limit) noexcept;
unsigned thread_limit() noexcept;

// Calls body(begin, end) over disjoint chunks of [0, n). Each element is
// written by exactly one chunk, so results do not depend on the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 1 << 15) {
    const std::size_t workers = std::min<std::size_t>(thread_limit(), (n + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

} // namespace uotkit
