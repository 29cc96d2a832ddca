#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ibmg {

/// Thread cap for intra-level parallel work, read from IBMG_THREADS (default 1).
inline int thread_count()
{
    if (const char* env = std::getenv("IBMG_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) {
                return t;
            }
        }
        catch (const std::exception&) {
        }
    }
    return 1;
}

// Static block partition of [0, count): every index is handled by exactly one
// worker, so the result does not depend on the thread count as long as body(i)
// writes only to locations owned by i.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body)
{
    const auto nt = static_cast<std::size_t>(std::max(1, threads));
    if (nt == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    const std::size_t workers = std::min(nt, count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    body(i);
                }
            }
            catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace ibmg
