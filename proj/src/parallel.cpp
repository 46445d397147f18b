#include "qtc/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <string>

namespace qtc {

int resolve_threads(int threads)
{
    if (threads > 0) return threads;
    if (const char* env = std::getenv("QTC_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ThreadPool::ThreadPool(int threads)
{
    int t = resolve_threads(threads);
    for (int i = 1; i < t; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool()
{
    {
        std::lock_guard<std::mutex> lk(mu_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::drain()
{
    while (true) {
        std::size_t i;
        const std::function<void(std::size_t)>* job;
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (!job_ || next_ >= n_) return;
            i = next_++;
            job = job_;
        }
        try {
            (*job)(i);
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu_);
            errors_[i] = std::current_exception();
        }
        std::lock_guard<std::mutex> lk(mu_);
        if (++finished_ == n_) done_.notify_all();
    }
}

void ThreadPool::worker_loop()
{
    std::size_t seen = 0;
    while (true) {
        {
            std::unique_lock<std::mutex> lk(mu_);
            wake_.wait(lk, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        drain();
    }
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    if (n == 0) return;
    {
        std::lock_guard<std::mutex> lk(mu_);
        job_ = &fn;
        n_ = n;
        next_ = finished_ = 0;
        errors_.assign(n, nullptr);
        ++generation_;
    }
    wake_.notify_all();
    drain();
    std::vector<std::exception_ptr> errors;
    {
        std::unique_lock<std::mutex> lk(mu_);
        done_.wait(lk, [&] { return finished_ == n_; });
        job_ = nullptr;
        errors.swap(errors_);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace qtc
