#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dlsmc {

// Persistent worker pool. Work is always split over a fixed chunk grid that
// does not depend on the number of threads, and per-chunk results are reduced
// in chunk order by the callers; run results are therefore bit-identical for
// any pool size, including the serial fallback.
class ThreadPool {
public:
    explicit ThreadPool(int threads) {
        if (threads < 1) threads = 1;
        for (int i = 0; i + 1 < threads; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            shutdown_ = true;
        }
        wake_.notify_all();
        for (auto& w : workers_) w.join();
    }

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    // Runs fn(chunk) for chunk = 0..chunks-1, returning when all are done.
    // The calling thread participates.
    void run_chunks(int chunks, const std::function<void(int)>& fn) {
        if (chunks <= 0) return;
        if (workers_.empty() || chunks == 1) {
            for (int c = 0; c < chunks; ++c) fn(c);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            job_ = &fn;
            total_ = chunks;
            next_.store(0, std::memory_order_relaxed);
            pending_ = chunks;
            ++generation_;
        }
        wake_.notify_all();
        drain();
        {
            std::unique_lock<std::mutex> lock(mutex_);
            done_.wait(lock, [this] { return pending_ == 0; });
            job_ = nullptr;
        }
    }

private:
    void drain() {
        for (;;) {
            int c = next_.fetch_add(1, std::memory_order_relaxed);
            if (c >= total_) break;
            (*job_)(c);
            finish_one();
        }
    }

    void finish_one() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (--pending_ == 0) done_.notify_all();
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* job = nullptr;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                wake_.wait(lock, [&] { return shutdown_ || (job_ && generation_ != seen); });
                if (shutdown_) return;
                seen = generation_;
                job = job_;
            }
            for (;;) {
                int c = next_.fetch_add(1, std::memory_order_relaxed);
                if (c >= total_) break;
                (*job)(c);
                finish_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_, done_;
    const std::function<void(int)>* job_ = nullptr;
    std::atomic<int> next_{0};
    int total_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool shutdown_ = false;
};

// Splits [0,n) into `chunks` contiguous ranges and calls
// fn(begin, end, chunk). Pool may be null (serial execution).
template <class F>
void parallel_for(ThreadPool* pool, std::size_t n, int chunks, F&& fn) {
    if (n == 0) return;
    if (chunks < 1) chunks = 1;
    if (static_cast<std::size_t>(chunks) > n) chunks = static_cast<int>(n);
    auto run = [&](int c) {
        std::size_t begin = n * static_cast<std::size_t>(c) / chunks;
        std::size_t end = n * (static_cast<std::size_t>(c) + 1) / chunks;
        fn(begin, end, c);
    };
    if (pool == nullptr) {
        for (int c = 0; c < chunks; ++c) run(c);
    } else {
        pool->run_chunks(chunks, run);
    }
}

}  // namespace dlsmc
