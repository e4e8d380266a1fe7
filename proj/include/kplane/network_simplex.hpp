#pragma once

#include <cstdint>
#include <vector>

namespace kplane {

/// One positive entry of an integer transport plan.
struct FlowEntry {
  std::int32_t row;
  std::int32_t col;
  std::int64_t flow;
};

/// Exact solver for the balanced transportation problem
///   min sum c_ij x_ij  s.t.  sum_j x_ij = supply_i, sum_i x_ij = demand_j, x >= 0
/// on the complete bipartite graph, by the primal network simplex method with
/// an artificial root, block-search pricing and the strongly feasible leaving
/// rule (no cycling). Integer data keeps the optimality test exact.
///
/// `cost` is row-major n x m with entries in [0, 2^40]; supplies and demands
/// must be positive and have equal sums.
std::vector<FlowEntry> solve_transportation(const std::vector<std::int64_t>& supply,
                                            const std::vector<std::int64_t>& demand,
                                            const std::vector<std::int64_t>& cost);

}  // namespace kplane
