#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace simflood {

/// Runs fn(begin, end) over [0, count) in blocks of `block` rows. Block b is
/// owned by worker b % workers; the partition never affects the values a
/// block computes.
template <typename Fn>
void parallel_blocks(Eigen::Index count, Eigen::Index block, int workers, Fn&& fn) {
  if (count <= 0) return;
  block = std::max<Eigen::Index>(block, 1);
  const Eigen::Index num_blocks = (count + block - 1) / block;
  const auto num_workers = static_cast<Eigen::Index>(std::clamp<Eigen::Index>(workers, 1, num_blocks));

  auto run_worker = [&](Eigen::Index w) {
    for (Eigen::Index b = w; b < num_blocks; b += num_workers)
      fn(b * block, std::min(count, (b + 1) * block));
  };
  if (num_workers == 1) {
    run_worker(0);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(num_workers));
    for (Eigen::Index w = 0; w < num_workers; ++w)
      threads.emplace_back([&, w] {
        try {
          run_worker(w);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace simflood
