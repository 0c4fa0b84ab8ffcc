#pragma once

#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mfhelm {

/// Bad input: violated precondition, malformed file, inconsistent config.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: solver breakdown, resonance rejection, non-convergence.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested work exceeds hard resource limits (e.g. projected mesh size).
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

template <typename... Args>
std::string format_msg(Args&&... args)
{
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

/// Process-wide cap on worker threads used by parallel_for. 0 = hardware default.
inline unsigned& worker_thread_cap()
{
    static unsigned cap = 0;
    return cap;
}

inline unsigned effective_thread_count(std::size_t work_items)
{
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned cap = worker_thread_cap();
    unsigned n = (cap == 0) ? hw : std::min(cap, hw);
    if (work_items < n) n = static_cast<unsigned>(work_items);
    return std::max(1u, n);
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks so that
/// results indexed by i merge deterministically regardless of thread count.
/// Exceptions from workers are rethrown on the calling thread (first one wins).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    if (n == 0) return;
    unsigned nthreads = effective_thread_count(n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    std::size_t block = (n + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
        std::size_t lo = t * block;
        std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&, t, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mfhelm
