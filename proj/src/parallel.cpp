#include "pskqkd/parallel.hpp"

#include <algorithm>

namespace pskqkd {

namespace {
std::atomic<int> g_max_threads{0}; // 0 = not set yet, use hardware concurrency
}

int max_threads() {
    const int n = g_max_threads.load(std::memory_order_relaxed);
    if (n > 0)
        return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_max_threads(int n) {
    g_max_threads.store(std::max(n, 1), std::memory_order_relaxed);
}

} // namespace pskqkd
