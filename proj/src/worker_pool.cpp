#include "feynbody/worker_pool.hpp"

#include <algorithm>

namespace feynbody {

WorkerPool::WorkerPool(unsigned workers) : workers_(std::max(1u, workers)) {
    for (unsigned id = 1; id < workers_; ++id) threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::run_chunk(unsigned id) {
    // Static interleaved partition: index i belongs to worker i % workers.
    for (std::size_t i = id; i < task_size_; i += workers_) {
        try {
            (*task_)(i);
        } catch (...) {
            errors_[i] = std::current_exception();
        }
    }
}

void WorkerPool::worker_loop(unsigned id) {
    unsigned long seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        run_chunk(id);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) done_.notify_one();
        }
    }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    errors_.assign(n, nullptr);
    if (workers_ == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors_[i] = std::current_exception();
            }
        }
    } else {
        {
            std::lock_guard lock(mutex_);
            task_ = &fn;
            task_size_ = n;
            pending_ = workers_ - 1;
            ++generation_;
        }
        wake_.notify_all();
        run_chunk(0);
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return pending_ == 0; });
    }
    task_ = nullptr;
    for (auto& e : errors_)
        if (e) std::rethrow_exception(e);
}

}  // namespace feynbody
