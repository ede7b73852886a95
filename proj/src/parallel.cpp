#include "uotkit/parallel.hpp"

#include <atomic>

namespace uotkit {

namespace {
std::atomic<unsigned> g_limit{0};
}

void set_thread_limit(unsigned limit) noexcept { g_limit.store(limit); }

unsigned thread_limit() noexcept {
    const unsigned limit = g_limit.load();
    if (limit != 0) return limit;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace uotkit
