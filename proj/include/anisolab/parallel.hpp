#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace anisolab {

/// Evaluates fn(i) for i in [0, n) on `threads` workers and returns the results in index
/// order. Work is split into contiguous blocks; since each fn(i) owns its random stream,
/// the output does not depend on the worker count.
template <class Fn>
[[nodiscard]] auto parallel_map(std::size_t n, unsigned threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<T> out(n);
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t begin = n * w / workers;
                const std::size_t end = n * (w + 1) / workers;
                try {
                    for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace anisolab
