#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace okp {

/// Worker count for internally parallel kernels. 0 selects the hardware
/// concurrency. Results never depend on this value.
struct ExecOptions {
    unsigned threads = 0;
};

unsigned resolve_threads(ExecOptions exec) noexcept;

/// Splits [0, n) into at most `threads` contiguous ranges and runs
/// fn(begin, end) on each. The partition affects scheduling only; callers
/// must make each index's result independent of which range it falls in.
template <class Fn>
void parallel_for(std::size_t n, ExecOptions exec, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(resolve_threads(exec), n);
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace okp
