// Copyright 2026 The camgate Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace camgate
{

/// Runs produce(k) for k in [0, count) on up to `threads` workers and hands each
/// result to consume(k, result) strictly in ascending k, one call at a time.
/// The first exception thrown by either callback stops further work and is
/// rethrown on the calling thread.
template <class Produce, class Consume>
void ordered_parallel(std::size_t count, std::size_t threads, Produce produce, Consume consume)
{
  using Result = decltype(produce(std::size_t{}));
  std::mutex mutex;
  std::map<std::size_t, Result> pending;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::atomic<std::size_t> cursor{0};

  const auto worker = [&] {
    for (std::size_t k = cursor.fetch_add(1); k < count; k = cursor.fetch_add(1)) {
      try {
        Result result = produce(k);
        const std::lock_guard lock(mutex);
        if (failure) {
          return;
        }
        pending.emplace(k, std::move(result));
        for (auto it = pending.find(next); it != pending.end(); it = pending.find(next)) {
          consume(next, std::move(it->second));
          pending.erase(it);
          ++next;
        }
      } catch (...) {
        const std::lock_guard lock(mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        cursor.store(count);
        return;
      }
    }
  };

  const std::size_t pool_size = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (pool_size == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(pool_size);
    for (std::size_t t = 0; t < pool_size; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace camgate
