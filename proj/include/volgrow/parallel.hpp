#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace volgrow {

/// Global worker count for parallel maps. Results never depend on it: work
/// items write to preassigned slots and reductions run afterwards in index
/// order, so outputs are bit-identical for any thread count.
inline int& thread_count() {
    static int n = 1;
    return n;
}

/// Evaluate fn(i) for i in [0, count) into preassigned slots, possibly in
/// parallel. fn must only touch its own slot.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int workers = thread_count();
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t nw = std::min<std::size_t>(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            // fixed block partition: assignment of i to blocks is thread-count
            // dependent but slots are disjoint, so results are not
            const std::size_t lo = count * w / nw;
            const std::size_t hi = count * (w + 1) / nw;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace volgrow
