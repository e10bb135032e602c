#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace subauction {

// Runs fn(i) for i in [0, n) across hardware threads and returns the results
// in index order, so parallel sweeps stay deterministic. fn must be safe to
// call concurrently; give each index its own RNG substream.
template <typename T, typename Fn>
std::vector<T> parallel_map(int n, Fn&& fn, int max_threads = 0) {
  std::vector<T> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n <= 0) return out;
  int hw = max_threads > 0 ? max_threads
                           : static_cast<int>(std::thread::hardware_concurrency());
  int workers = std::max(1, std::min(n, hw));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace subauction
