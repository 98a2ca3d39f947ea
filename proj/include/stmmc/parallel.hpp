#ifndef STMMC_PARALLEL_HPP
#define STMMC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace stmmc {

/// Worker count: STMMC_THREADS if set and positive, else hardware concurrency.
int thread_count();

/**
 * Runs body(i) for i in [0, n), split into contiguous chunks over thread_count() workers.
 * Bodies must only write to per-index state; results are then independent of the thread count.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Keeps freed training buffers in the heap instead of returning them to the OS on every epoch.
/// Call once at program start; a no-op outside glibc.
void tune_allocator();

} // namespace stmmc

#endif
