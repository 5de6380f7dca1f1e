#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace execfilter {

// 0 requests one worker per hardware thread; the job count caps the answer.
inline unsigned resolve_threads(unsigned requested, std::size_t jobs) {
    unsigned t = requested;
    if (t == 0) {
        t = std::thread::hardware_concurrency();
        if (t == 0) t = 1;
    }
    if (jobs == 0) return 1;
    if (jobs < t) t = static_cast<unsigned>(jobs);
    return t;
}

// Runs job(0..n-1) on a pool of workers and hands each result to sink in
// index order. Out-of-order completions wait in a buffer until their turn.
// The sink runs on the calling thread only. The first exception thrown by a
// job or the sink stops the dispatch and is rethrown after the workers join.
template <typename R>
void parallel_for_ordered(std::size_t n, unsigned threads,
                          const std::function<R(std::size_t)>& job,
                          const std::function<void(std::size_t, R&&)>& sink) {
    if (n == 0) return;
    const unsigned nt = resolve_threads(threads, n);

    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, R> ready;
    std::exception_ptr failure;
    std::atomic<std::size_t> next_index{0};
    bool stop = false;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next_index.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (stop) return;
            }
            try {
                R r = job(i);
                std::lock_guard<std::mutex> lock(mu);
                ready.emplace(i, std::move(r));
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);

    std::size_t emitted = 0;
    {
        std::unique_lock<std::mutex> lock(mu);
        while (emitted < n && !stop) {
            cv.wait(lock, [&] { return stop || ready.count(emitted) > 0; });
            if (stop) break;
            R r = std::move(ready.begin()->second);
            ready.erase(ready.begin());
            lock.unlock();
            try {
                sink(emitted, std::move(r));
            } catch (...) {
                lock.lock();
                if (!failure) failure = std::current_exception();
                stop = true;
                break;
            }
            ++emitted;
            lock.lock();
        }
        stop = stop || emitted == n;
    }
    cv.notify_all();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Collects job results into a vector indexed like the inputs.
template <typename R>
std::vector<R> parallel_map(std::size_t n, unsigned threads,
                            const std::function<R(std::size_t)>& job) {
    std::vector<R> out(n);
    parallel_for_ordered<R>(n, threads, job, [&](std::size_t i, R&& r) {
        out[i] = std::move(r);
    });
    return out;
}

}  // namespace execfilter
