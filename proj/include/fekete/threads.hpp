#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fekete {

/// Worker count: FEKETE_FIELD_THREADS caps it, default is machine parallelism.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("FEKETE_FIELD_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return std::min(static_cast<unsigned>(v), hw);
    }
    return hw;
}

// Runs f(begin, end) over fixed-size blocks of [0, n). The block partition is
// independent of the thread count, so any per-block output is reproducible.
template <class F>
inline void parallel_blocks(std::size_t n, std::size_t block_size, F&& f) {
    if (n == 0) return;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    const unsigned workers = std::min<std::size_t>(worker_count(), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            f(b * block_size, std::min(n, (b + 1) * block_size));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            f(b * block_size, std::min(n, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
}

// Deterministic parallel sum: per-block partials are accumulated sequentially
// inside each block and then reduced in block order.
template <class Term>
inline double parallel_block_sum(std::size_t n, std::size_t block_size, Term&& term) {
    if (n == 0) return 0.0;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    std::vector<double> partial(n_blocks, 0.0);
    parallel_blocks(n, block_size, [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        partial[begin / block_size] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace fekete
