#pragma once

// Static work partitioning over a small thread pool.  Work item i always
// produces the same result regardless of worker count; callers combine
// per-index outputs in index order, so results are worker-count invariant.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace spinglass {

int worker_count();           // current global setting (default: 1)
void set_worker_count(int n); // from CLI --threads / GLASS_THREADS

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int workers = std::max(1, std::min<int>(worker_count(), int(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = std::size_t(w); i < n; i += std::size_t(workers)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace spinglass
