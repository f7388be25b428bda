#pragma once

#include <cstddef>
#include <functional>

namespace dagvae {

/// Worker count: DAGVAE_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = worker_threads()).
/// Work is split into contiguous blocks; the exception from the lowest index
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace dagvae
