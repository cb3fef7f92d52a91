#ifndef YM_PARALLEL_HPP
#define YM_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace ym {

// Parallelism cap from YM_THREADS (default: hardware concurrency).
int thread_cap();

// Runs fn(block, begin, end) over a fixed block partition of [0, n).
// The partition is independent of the thread count, so block-local
// accumulations merged in block order stay bit-identical at any cap.
inline void parallel_blocks(int64_t n, int nblocks,
                            const std::function<void(int, int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    nblocks = static_cast<int>(std::min<int64_t>(nblocks, n));
    int nthreads = std::min(thread_cap(), nblocks);
    if (nthreads <= 1) {
        for (int b = 0; b < nblocks; ++b)
            fn(b, n * b / nblocks, n * (b + 1) / nblocks);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b, n * b / nblocks, n * (b + 1) / nblocks);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace ym

#endif
