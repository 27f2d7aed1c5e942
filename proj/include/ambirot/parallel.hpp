#pragma once

// Chunked parallel map with results independent of the degree of parallelism:
// work is split into fixed chunks, each chunk writes its own slot, and the
// AMBIROT_THREADS environment variable caps the worker count.

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ambirot {

inline unsigned max_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("AMBIROT_THREADS")) {
        try {
            long cap = std::stol(env);
            if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
        } catch (...) {
        }
    }
    return hw;
}

// fn(chunk_index) -> T; chunk results returned in index order regardless of
// scheduling. force_workers overrides the thread count (used by tests).
template <typename T, typename Fn>
std::vector<T> parallel_chunks(size_t n_chunks, Fn&& fn, unsigned force_workers = 0) {
    std::vector<T> out(n_chunks);
    size_t workers = force_workers ? force_workers : max_threads();
    workers = std::min<size_t>(workers, n_chunks);
    if (workers <= 1) {
        for (size_t i = 0; i < n_chunks; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n_chunks) return;
                out[i] = fn(i);
            }
        });
    for (auto& t : pool) t.join();
    return out;
}

} // namespace ambirot
