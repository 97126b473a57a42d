#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace darksearch::runner {

[[nodiscard]] inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(index, worker) for index in [0, n) from `workers` threads pulling
/// indices off a shared counter. The first exception stops further dispatch
/// and is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::uint64_t n, unsigned workers, Fn&& fn) {
    workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), std::max<std::uint64_t>(n, 1)));
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const auto body = [&](unsigned w) {
        for (;;) {
            if (stop.load(std::memory_order_relaxed)) return;
            const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i, w);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                stop = true;
                return;
            }
        }
    };

    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(body, w);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace darksearch::runner
