#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace topocover {

/// Process-wide worker count for parallel loops. 0 means hardware concurrency.
void set_thread_count(unsigned count) noexcept;
unsigned thread_count() noexcept;

/// Calls body(i) for i in [begin, end) using contiguous chunks, one per worker.
/// Bodies must write only to disjoint outputs; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace topocover
