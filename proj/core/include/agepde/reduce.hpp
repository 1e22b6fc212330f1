#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace agepde {

/// Pairwise sum with a fixed split order. The result depends only on the
/// input sequence, never on thread count or scheduling.
double tree_sum(std::span<const double> v);

/// tree_sum of a[i]*b[i].
double tree_dot(std::span<const double> a, std::span<const double> b);

/// Worker count: hardware concurrency capped by AGEPDE_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write to disjoint slots so results do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace agepde
