#pragma once

#include <cstddef>
#include <functional>

namespace treeval {

/// Caps worker threads for every parallel loop. 0 selects the hardware
/// concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(begin, end) over a chunk plan of [0, n) that depends only on
/// `n` and `grain`, never on the thread count. Bodies that reduce per chunk
/// and combine chunks in index order therefore give results independent of
/// scheduling.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace treeval
