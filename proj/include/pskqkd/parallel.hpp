#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pskqkd {

// Worker cap for parallel_for; defaults to hardware concurrency. The CLI sets this
// from --threads. Results never depend on the value, only wall time does.
int max_threads();
void set_max_threads(int n);

// Runs body(i) for i in [0, n). Each thread works on its own copy of body, so bodies
// may carry mutable scratch buffers. Work is handed out dynamically, but callers are
// expected to write results by index; with a final serial reduction that makes every
// run bit-identical regardless of thread count.
template <typename Body>
void parallel_for(int n, Body body) {
    if (n <= 0)
        return;
    const int workers = std::min(max_threads(), n);
    if (workers <= 1) {
        Body local(body);
        for (int i = 0; i < n; ++i)
            local(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&next, &error, &error_mutex, n, local = Body(body)]() mutable {
            try {
                for (;;) {
                    const int i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= n)
                        return;
                    local(i);
                }
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n, std::memory_order_relaxed); // stop handing out work
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

// Compensated accumulator so the serial reductions do not depend on magnitude order.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

} // namespace pskqkd
