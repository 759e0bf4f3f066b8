#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace geomld {

// Static chunked parallel loop. Each iteration writes only to its own slot,
// so the result is identical for any thread count; reductions happen after
// the loop in index order.
inline void parallel_for(long count, int threads,
                         const std::function<void(long)>& fn) {
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    const int t = static_cast<int>(std::min<long>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (long i = w; i < count; i += t) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace geomld
