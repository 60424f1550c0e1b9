#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace relax {

/// Runs fn(0..count-1) over `threads` workers (strided). Task i must only
/// touch its own output slot; the first failure is rethrown after joining.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t used = std::min(workers, count);
    std::vector<std::exception_ptr> failures(used);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < used; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += used) fn(i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

}  // namespace relax
