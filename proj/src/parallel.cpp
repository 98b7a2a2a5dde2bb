#include "msrf/parallel.hpp"

#include <algorithm>

namespace msrf {

ThreadPool::ThreadPool(int n_workers) : n_workers_(std::max(1, n_workers)) {
  for (int i = 1; i < n_workers_; ++i) {
    threads_.emplace_back([this, i] { worker_loop(i); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    shutdown_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

int ThreadPool::default_worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

void ThreadPool::parallel_for(
    int64_t n, const std::function<void(int, int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  auto chunk = [this, n](int w) -> std::pair<int64_t, int64_t> {
    int64_t per = (n + n_workers_ - 1) / n_workers_;
    int64_t begin = std::min<int64_t>(n, per * w);
    int64_t end = std::min<int64_t>(n, begin + per);
    return {begin, end};
  };
  if (n_workers_ == 1) {
    fn(0, 0, n);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    job_ = &fn;
    job_n_ = n;
    pending_ = n_workers_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();
  auto [b0, e0] = chunk(0);
  if (b0 < e0) fn(0, b0, e0);
  std::unique_lock<std::mutex> lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
}

void ThreadPool::worker_loop(int index) {
  uint64_t seen = 0;
  for (;;) {
    const std::function<void(int, int64_t, int64_t)>* job = nullptr;
    int64_t n = 0;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      start_cv_.wait(lock,
                     [&] { return shutdown_ || generation_ != seen; });
      if (shutdown_) return;
      seen = generation_;
      job = job_;
      n = job_n_;
    }
    int64_t per = (n + n_workers_ - 1) / n_workers_;
    int64_t begin = std::min<int64_t>(n, per * index);
    int64_t end = std::min<int64_t>(n, begin + per);
    if (begin < end) (*job)(index, begin, end);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }
}

}  // namespace msrf
