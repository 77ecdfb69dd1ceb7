#ifndef LLE_PARALLEL_HPP
#define LLE_PARALLEL_HPP

#include "lle/types.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lle::detail {

/* Runs fn(i) for i in [0, n) over contiguous blocks on up to `threads`
 * workers. Callers write only to slot i, so results do not depend on the
 * thread count. The exception from the lowest failing index is rethrown. */
template <class Fn>
void parallel_for(Index n, int threads, Fn&& fn) {
    const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
    if (workers == 1) {
        for (Index i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::mutex guard;
    Index failed_at = n;
    std::exception_ptr failure;
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        const Index block = (n + workers - 1) / workers;
        for (Index w = 0; w < workers; ++w) {
            const Index lo = w * block;
            const Index hi = std::min(n, lo + block);
            pool.emplace_back([&, lo, hi] {
                for (Index i = lo; i < hi; ++i) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(guard);
                        if (i < failed_at) {
                            failed_at = i;
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace lle::detail

#endif
