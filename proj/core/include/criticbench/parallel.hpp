#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace criticbench {

// Runs fn(i) for i in [0, task_count) on up to n_workers threads. Tasks must
// not share mutable state; results are deterministic because each task is
// keyed by its index, not by scheduling order. The first exception thrown by
// any task is rethrown on the calling thread after all workers join.
inline void parallel_for(std::size_t task_count, std::size_t n_workers,
                         const std::function<void(std::size_t)>& fn) {
    if (task_count == 0) return;
    if (n_workers == 0) n_workers = 1;
    if (n_workers > task_count) n_workers = task_count;

    if (n_workers == 1) {
        for (std::size_t i = 0; i < task_count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= task_count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::size_t default_worker_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<std::size_t>(hc);
}

} // namespace criticbench
