#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fraclap {

/// Worker count: FRACLAP_THREADS if set and positive, else hardware concurrency.
[[nodiscard]] inline unsigned worker_count() {
    if (const char* env = std::getenv("FRACLAP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [begin, end) over contiguous chunks. Each index must
/// write only its own output slot; results do not depend on the worker count.
template <class Body>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, Body&& body) {
    const std::ptrdiff_t n = end - begin;
    if (n <= 0) return;
    const auto workers = static_cast<std::ptrdiff_t>(std::min<unsigned>(worker_count(), static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::ptrdiff_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::ptrdiff_t w = 0; w < workers; ++w) {
        const std::ptrdiff_t lo = begin + n * w / workers;
        const std::ptrdiff_t hi = begin + n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::scoped_lock lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fraclap
