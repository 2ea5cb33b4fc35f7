#ifndef NJCR_PARALLEL_HPP
#define NJCR_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace njcr {

/// Caps the number of worker threads used by parallel_for. 0 means hardware
/// concurrency.
void set_max_threads(std::size_t threads);
std::size_t max_threads();

/// Runs body(i) for i in [begin, end) across up to max_threads() workers in
/// contiguous chunks. Exceptions from any worker are rethrown on the caller.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace njcr

#endif  // NJCR_PARALLEL_HPP
