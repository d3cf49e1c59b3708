// Copyright 2026 The cfisac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace cfisac {

// Process-wide worker cap. Commands expose it as --threads; timing runs
// force 1 so per-scene wall clocks stay meaningful.
inline std::atomic<int>& max_threads_ref() {
  static std::atomic<int> n{1};
  return n;
}

inline void set_max_threads(int n) { max_threads_ref().store(n < 1 ? 1 : n); }

inline int max_threads() { return max_threads_ref().load(); }

// Runs fn(i) for i in [0, n). Work is split into contiguous index ranges,
// one per worker. Callers must ensure iterations write to disjoint state;
// any cross-iteration reduction has to happen afterwards in index order so
// results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  int workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    std::size_t lo = chunk * static_cast<std::size_t>(w);
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(chunk, n); ++i) fn(i);
  for (auto& t : pool) t.join();
}

// Scoped override of the worker cap.
class ThreadGuard {
 public:
  explicit ThreadGuard(int n) : prev_(max_threads()) { set_max_threads(n); }
  ~ThreadGuard() { set_max_threads(prev_); }
  ThreadGuard(const ThreadGuard&) = delete;
  ThreadGuard& operator=(const ThreadGuard&) = delete;

 private:
  int prev_;
};

}  // namespace cfisac
