#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace vpinn {

inline int worker_count() {
    if (const char* env = std::getenv("VPINN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block) for block = 0..nblocks-1 across workers. Each block owns its
// outputs, so results never depend on the thread count or schedule.
inline void parallel_blocks(int nblocks, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), nblocks);
    if (workers <= 1) {
        for (int b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<int> next{0};
    auto drain = [&]() {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
}

}  // namespace vpinn
