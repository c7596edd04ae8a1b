#pragma once

// Shared error types and small utilities used across the library.

#include <stdexcept>
#include <string>
#include <thread>
#include <vector>
#include <functional>

namespace hawkes {

// Malformed or inconsistent input (files, windows, parameters).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical degeneracy or non-convergence detected at run time.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DataError(msg);
}

// Static partition of [0, n) across up to `threads` workers.  Results that
// depend on accumulation order must be merged by the caller in index order;
// chunk boundaries are deterministic for a given (n, threads).
inline void parallel_for(long n, int threads, const std::function<void(long, long)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || n < 2) {
        body(0, n);
        return;
    }
    int workers = static_cast<int>(std::min<long>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    long chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
        long lo = t * chunk;
        long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
}

}  // namespace hawkes
