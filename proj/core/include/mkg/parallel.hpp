#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace mkg {

// Process-wide worker pool. Work is split into contiguous static ranges, so any
// per-index computation is independent of the worker count.
void set_thread_count(int n);
int thread_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Pairwise summation over fixed 4096-element blocks; the tree shape depends only on n.
double deterministic_sum(std::span<const double> values);
double deterministic_max(std::span<const double> values);

}  // namespace mkg
