#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace msrf {

// Persistent worker pool. parallel_for partitions [0, n) into one contiguous
// chunk per worker; chunk w is processed in index order by worker w, so any
// per-worker accumulation is reproducible for a fixed worker count.
// n_workers == 1 runs inline on the calling thread (single-worker mode).
class ThreadPool {
 public:
  explicit ThreadPool(int n_workers);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int worker_count() const { return n_workers_; }

  // fn(worker_index, begin, end)
  void parallel_for(int64_t n,
                    const std::function<void(int, int64_t, int64_t)>& fn);

  static int default_worker_count();

 private:
  void worker_loop(int index);

  int n_workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int, int64_t, int64_t)>* job_ = nullptr;
  int64_t job_n_ = 0;
  uint64_t generation_ = 0;
  int pending_ = 0;
  bool shutdown_ = false;
};

}  // namespace msrf
