#ifndef PFMA_PARALLEL_HPP
#define PFMA_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace pfma {

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

/// Run body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Work items must write only to their own slots; results are
/// then independent of the schedule. The first exception thrown by a worker
/// is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pfma

#endif  // PFMA_PARALLEL_HPP
