#pragma once

// Deterministic fan-out of Monte Carlo work. The sample budget is cut into
// fixed-size blocks; block k always draws from substream k of the caller's
// stream, and partial results are merged in block order. Output therefore
// depends on (seed, n) but not on how many workers ran the blocks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rtail/rng.hpp"

namespace rtail {

inline constexpr std::uint64_t kBlockSize = 8192;

/// Sum, sum of squares and count of a scalar estimator; merges associatively.
struct Moments
{
    double sum = 0.0;
    double sumsq = 0.0;
    std::uint64_t count = 0;

    void add(double v) noexcept
    {
        sum += v;
        sumsq += v * v;
        ++count;
    }
    void merge(const Moments& o) noexcept
    {
        sum += o.sum;
        sumsq += o.sumsq;
        count += o.count;
    }
    double mean() const noexcept { return count ? sum / static_cast<double>(count) : 0.0; }
    /// Standard error of the mean.
    double std_error() const noexcept
    {
        if (count < 2)
            return 0.0;
        double n = static_cast<double>(count);
        double m = sum / n;
        double var = std::max(0.0, (sumsq - n * m * m) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

/**
 * Runs `body(block_index, block_count, rng)` for every block of n items and
 * folds the returned partials with `merge(acc, partial)` in block order.
 */
template <class Partial, class Body, class Merge>
Partial run_blocks(std::uint64_t n, unsigned workers, const RngStream& rng, Body&& body,
                   Merge&& merge, std::uint64_t block_size = kBlockSize)
{
    const std::uint64_t blocks = (n + block_size - 1) / block_size;
    std::vector<Partial> partials(blocks);
    auto do_block = [&](std::uint64_t b) {
        RngStream sub = rng.substream(b);
        std::uint64_t count = std::min(block_size, n - b * block_size);
        partials[b] = body(b, count, sub);
    };

    workers = std::max(1u, workers);
    if (workers == 1 || blocks <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b)
            do_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        unsigned used = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
        for (unsigned w = 0; w < used; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t b = next++; b < blocks; b = next++) {
                    try {
                        do_block(b);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                        next = blocks;
                    }
                }
            });
        }
        for (auto& th : pool)
            th.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    Partial acc{};
    for (auto& p : partials)
        merge(acc, p);
    return acc;
}

}  // namespace rtail
