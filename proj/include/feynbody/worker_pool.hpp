#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace feynbody {

/// Fixed set of threads running index-parallel loops. Each index writes only
/// its own output slot, so results do not depend on the worker count. When
/// several indices throw, the exception of the lowest index is rethrown.
class WorkerPool {
public:
    explicit WorkerPool(unsigned workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned workers() const { return workers_; }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop(unsigned id);
    void run_chunk(unsigned id);

    unsigned workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t task_size_ = 0;
    std::vector<std::exception_ptr> errors_;
    unsigned pending_ = 0;
    unsigned long generation_ = 0;
    bool stop_ = false;
};

}  // namespace feynbody
