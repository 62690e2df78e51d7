#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace conjlab {

/// Replicas per work unit. Fixed so that partial results, and hence every
/// floating-point reduction, do not depend on the number of workers.
inline constexpr std::uint64_t kReplicaChunk = 4096;

inline unsigned resolve_jobs(unsigned jobs) {
    if (jobs != 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluates fn(begin, end) on consecutive chunks of [0, n) and returns the
/// per-chunk results in chunk order. Chunks are claimed dynamically by up to
/// `jobs` workers (0 = hardware concurrency).
template <class Result, class Fn>
std::vector<Result> map_chunks(std::uint64_t n, unsigned jobs, Fn&& fn,
                               std::uint64_t chunk = kReplicaChunk) {
    const std::uint64_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<Result> out(n_chunks);
    if (n_chunks == 0) return out;

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                const std::uint64_t begin = c * chunk;
                out[c] = fn(begin, std::min(n, begin + chunk));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_chunks);
                return;
            }
        }
    };

    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_jobs(jobs), n_chunks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace conjlab
