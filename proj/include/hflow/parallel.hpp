#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace hflow {

// Worker cap: hardware concurrency, clamped by HELSTROM_FLOW_THREADS.
inline int max_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("HELSTROM_FLOW_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < hw) hw = cap;
    }
    return hw;
}

// Chunked index-space parallel loop; f(i) must only write state owned by
// index i so results are deterministic regardless of scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const int workers = max_threads();
    if (n == 0) return;
    if (workers == 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace hflow
