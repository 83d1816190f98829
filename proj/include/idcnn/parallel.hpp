#pragma once

#include <cstddef>
#include <functional>

namespace idcnn {

/// Process-wide execution settings for the NN engine and image filters.
///
/// In deterministic mode every floating-point reduction is performed in a
/// fixed order that does not depend on the thread count, so results are
/// bit-identical for any --threads value.
struct ExecutionPolicy {
    unsigned threads = 1;
    bool deterministic = true;
};

/// Threads default to the IDCNN_THREADS environment variable, else 1.
ExecutionPolicy execution_policy();
void set_execution_policy(ExecutionPolicy policy);
unsigned default_thread_count();

/// Runs body(i) for i in [0, count), splitting contiguous ranges over the
/// configured number of threads. body must only touch disjoint data.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace idcnn
