// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gsav {

namespace detail {
inline std::atomic<int>& thread_override() {
    static std::atomic<int> value{0};
    return value;
}
}  // namespace detail

/// Sets the worker count used by parallel_for. Zero restores the default
/// (GSAV_THREADS if set, otherwise hardware concurrency).
inline void set_num_threads(int n) { detail::thread_override().store(std::max(0, n)); }

inline int num_threads() {
    if (const int n = detail::thread_override().load(); n > 0) return n;
    if (const char* env = std::getenv("GSAV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [begin, end). Work is handed out in chunks from a shared
/// counter; fn must only write state owned by index i.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t grain = 1) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(num_threads()), (count + grain - 1) / grain);
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        try {
            for (;;) {
                const std::size_t start = next.fetch_add(grain);
                if (start >= end) break;
                const std::size_t stop = std::min(end, start + grain);
                for (std::size_t i = start; i < stop; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(end);
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace gsav
