#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ergorate {

inline int default_threads() {
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

// Runs fn(i) for i in [0, count). Work items must write disjoint outputs;
// results therefore do not depend on the thread count.
template <class F>
void parallel_for(long long count, int threads, F&& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long long>(count, 1 << 20))));
    if (threads <= 1) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (long long i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace ergorate
