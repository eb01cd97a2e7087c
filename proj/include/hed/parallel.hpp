#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hed {

inline unsigned max_threads() {
    if (const char* env = std::getenv("HED_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs fn(begin, end) over disjoint chunks covering [0, n). Every index lands
// in exactly one chunk, so kernels that write only to their own output rows
// produce results identical to a sequential fn(0, n) call.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 2048) {
    if (n == 0) return;
    unsigned nt = max_threads();
    if (nt <= 1 || n <= grain) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t n_chunks = (n + grain - 1) / grain;
    if (n_chunks > nt) n_chunks = nt;
    std::size_t per = (n + n_chunks - 1) / n_chunks;

    std::vector<std::thread> workers;
    workers.reserve(n_chunks);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        std::size_t lo = c * per;
        std::size_t hi = lo + per < n ? lo + per : n;
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hed
