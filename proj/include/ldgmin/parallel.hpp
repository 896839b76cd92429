#ifndef LDGMIN_PARALLEL_HPP
#define LDGMIN_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ldgmin {

/// Worker count for cell/face loops. Honors LDGMIN_THREADS; defaults to the
/// hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write into per-index slots and reduce afterwards in index order, so the
/// result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ldgmin

#endif  // LDGMIN_PARALLEL_HPP
