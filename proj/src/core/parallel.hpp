#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace uqx {

// Runs fn(i) for i in [0, n). Workers pull indices from a shared counter and
// must write results only into i-indexed slots preallocated by the caller;
// with work-unit RNG streams keyed by i this keeps every output byte
// identical for any thread count. The first exception wins and is rethrown
// on the calling thread.
inline void parallel_for(std::size_t n, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (std::size_t t = 0; t < worker_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

} // namespace uqx
