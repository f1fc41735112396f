#ifndef MVJUMP_PARALLEL_HPP
#define MVJUMP_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mvj {

/// Runs fn(i) for i in [0, n). Work items must be independent; results
/// keyed by index stay deterministic regardless of schedule.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
    if (n == 0) return;
    unsigned hw = n_threads ? n_threads : std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (hw == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    workers.reserve(k);
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < k; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

/// Global worker count used by experiment drivers; 0 = hardware default.
unsigned& worker_threads();

} // namespace mvj

#endif
