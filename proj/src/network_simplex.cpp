#include "kplane/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kplane/error.hpp"

namespace kplane {

namespace {

// Spanning tree rooted at an artificial node. Only tree arcs carry flow (the
// graph is uncapacitated, so every non-tree arc sits at zero), hence flows are
// stored per node on the arc to its parent.
class TransportationSimplex {
 public:
  TransportationSimplex(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                        const std::vector<std::int64_t>& cost)
      : n_(static_cast<std::int64_t>(supply.size())),
        m_(static_cast<std::int64_t>(demand.size())),
        real_arcs_(n_ * m_),
        root_(n_ + m_),
        cost_(cost) {
    const std::int64_t nodes = n_ + m_ + 1;
    std::int64_t max_cost = 0;
    for (auto c : cost_) max_cost = std::max(max_cost, c);
    big_ = (max_cost + 1) * nodes;

    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    up_.assign(nodes, 0);
    flow_.assign(nodes, 0);
    depth_.assign(nodes, 0);
    pot_.assign(nodes, 0);
    first_child_.assign(nodes, -1);
    next_sibling_.assign(nodes, -1);
    prev_sibling_.assign(nodes, -1);

    for (std::int64_t i = 0; i < n_; ++i) {
      parent_[i] = root_;
      pred_[i] = real_arcs_ + i;
      up_[i] = 1;
      flow_[i] = supply[static_cast<std::size_t>(i)];
      depth_[i] = 1;
      pot_[i] = 0;
      attach(i, root_);
    }
    for (std::int64_t j = 0; j < m_; ++j) {
      const std::int64_t node = n_ + j;
      parent_[node] = root_;
      pred_[node] = real_arcs_ + n_ + j;
      up_[node] = 0;
      flow_[node] = demand[static_cast<std::size_t>(j)];
      depth_[node] = 1;
      pot_[node] = big_;
      attach(node, root_);
    }
    block_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  std::vector<FlowEntry> run() {
    std::int64_t entering = 0;
    while (find_entering(entering)) pivot(entering);
    std::vector<FlowEntry> plan;
    for (std::int64_t x = 0; x < root_; ++x) {
      if (flow_[x] == 0) continue;
      const std::int64_t arc = pred_[x];
      require(arc < real_arcs_, "transport: infeasible instance (artificial flow remains)");
      plan.push_back({static_cast<std::int32_t>(arc / m_), static_cast<std::int32_t>(arc % m_), flow_[x]});
    }
    std::sort(plan.begin(), plan.end(),
              [](const FlowEntry& a, const FlowEntry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    return plan;
  }

 private:
  std::int64_t source(std::int64_t arc) const {
    if (arc < real_arcs_) return arc / m_;
    if (arc < real_arcs_ + n_) return arc - real_arcs_;
    return root_;
  }
  std::int64_t target(std::int64_t arc) const {
    if (arc < real_arcs_) return n_ + arc % m_;
    if (arc < real_arcs_ + n_) return root_;
    return n_ + (arc - real_arcs_ - n_);
  }
  std::int64_t arc_cost(std::int64_t arc) const {
    if (arc < real_arcs_) return cost_[static_cast<std::size_t>(arc)];
    if (arc < real_arcs_ + n_) return 0;
    return big_;
  }

  void attach(std::int64_t x, std::int64_t p) {
    prev_sibling_[x] = -1;
    next_sibling_[x] = first_child_[p];
    if (first_child_[p] >= 0) prev_sibling_[first_child_[p]] = x;
    first_child_[p] = x;
  }
  void detach(std::int64_t x) {
    const std::int64_t p = parent_[x];
    if (prev_sibling_[x] >= 0) {
      next_sibling_[prev_sibling_[x]] = next_sibling_[x];
    } else {
      first_child_[p] = next_sibling_[x];
    }
    if (next_sibling_[x] >= 0) prev_sibling_[next_sibling_[x]] = prev_sibling_[x];
    prev_sibling_[x] = next_sibling_[x] = -1;
  }

  // Block search over the real arcs: scan blocks cyclically from the last
  // position and take the most negative reduced cost of the first block that
  // contains one.
  bool find_entering(std::int64_t& entering) {
    std::int64_t best_rc = 0;
    std::int64_t best = -1;
    std::int64_t counted = 0;
    std::int64_t i = next_arc_ / m_;
    std::int64_t j = next_arc_ % m_;
    for (std::int64_t scanned = 0; scanned < real_arcs_; ++scanned) {
      const std::int64_t arc = i * m_ + j;
      const std::int64_t rc = cost_[static_cast<std::size_t>(arc)] + pot_[i] - pot_[n_ + j];
      if (rc < best_rc) {
        best_rc = rc;
        best = arc;
      }
      if (++j == m_) {
        j = 0;
        if (++i == n_) i = 0;
      }
      if (++counted == block_) {
        if (best >= 0) {
          next_arc_ = i * m_ + j;
          entering = best;
          return true;
        }
        counted = 0;
      }
    }
    if (best >= 0) {
      next_arc_ = i * m_ + j;
      entering = best;
      return true;
    }
    return false;
  }

  void pivot(std::int64_t entering) {
    const std::int64_t u = source(entering);
    const std::int64_t v = target(entering);
    std::int64_t a = u;
    std::int64_t b = v;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const std::int64_t join = a;

    // Cycle orientation: join ~> u -> v ~> join. The leaving arc is the last
    // blocking arc met along this orientation.
    std::int64_t delta = std::numeric_limits<std::int64_t>::max();
    std::int64_t leaving = -1;
    bool leaving_on_u_side = true;
    for (std::int64_t x = u; x != join; x = parent_[x]) {
      if (up_[x] && flow_[x] < delta) {
        delta = flow_[x];
        leaving = x;
      }
    }
    for (std::int64_t x = v; x != join; x = parent_[x]) {
      if (!up_[x] && flow_[x] <= delta) {
        delta = flow_[x];
        leaving = x;
        leaving_on_u_side = false;
      }
    }
    require(leaving >= 0, "transport: unbounded pivot (negative cycle)");

    if (delta > 0) {
      for (std::int64_t x = u; x != join; x = parent_[x]) flow_[x] += up_[x] ? -delta : delta;
      for (std::int64_t x = v; x != join; x = parent_[x]) flow_[x] += up_[x] ? delta : -delta;
    }

    // Re-hang the subtree below the leaving arc through the entering arc,
    // reversing the path from the entering endpoint to the old subtree root.
    const std::int64_t q = leaving_on_u_side ? u : v;
    const std::int64_t p = leaving_on_u_side ? v : u;
    std::int64_t x = q;
    std::int64_t new_parent = p;
    std::int64_t new_arc = entering;
    char new_up = leaving_on_u_side ? 1 : 0;
    std::int64_t new_flow = delta;
    while (true) {
      const std::int64_t old_parent = parent_[x];
      const std::int64_t old_arc = pred_[x];
      const char old_up = up_[x];
      const std::int64_t old_flow = flow_[x];
      detach(x);
      parent_[x] = new_parent;
      pred_[x] = new_arc;
      up_[x] = new_up;
      flow_[x] = new_flow;
      attach(x, new_parent);
      if (x == leaving) break;
      new_parent = x;
      new_arc = old_arc;
      new_up = old_up ? 0 : 1;
      new_flow = old_flow;
      x = old_parent;
    }
    refresh_subtree(q);
  }

  void refresh_node(std::int64_t x) {
    const std::int64_t p = parent_[x];
    depth_[x] = depth_[p] + 1;
    const std::int64_t c = arc_cost(pred_[x]);
    pot_[x] = up_[x] ? pot_[p] - c : pot_[p] + c;
  }

  void refresh_subtree(std::int64_t top) {
    refresh_node(top);
    std::int64_t x = top;
    while (true) {
      if (first_child_[x] >= 0) {
        x = first_child_[x];
        refresh_node(x);
        continue;
      }
      while (x != top && next_sibling_[x] < 0) x = parent_[x];
      if (x == top) return;
      x = next_sibling_[x];
      refresh_node(x);
    }
  }

  std::int64_t n_;
  std::int64_t m_;
  std::int64_t real_arcs_;
  std::int64_t root_;
  const std::vector<std::int64_t>& cost_;
  std::int64_t big_ = 0;
  std::int64_t block_ = 10;
  std::int64_t next_arc_ = 0;

  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<char> up_;
  std::vector<std::int64_t> flow_;
  std::vector<std::int64_t> depth_;
  std::vector<std::int64_t> pot_;
  std::vector<std::int64_t> first_child_;
  std::vector<std::int64_t> next_sibling_;
  std::vector<std::int64_t> prev_sibling_;
};

}  // namespace

std::vector<FlowEntry> solve_transportation(const std::vector<std::int64_t>& supply,
                                            const std::vector<std::int64_t>& demand,
                                            const std::vector<std::int64_t>& cost) {
  require(!supply.empty() && !demand.empty(), "transport: empty marginal");
  require(cost.size() == supply.size() * demand.size(), "transport: cost matrix has the wrong size");
  std::int64_t supply_total = 0;
  std::int64_t demand_total = 0;
  for (auto s : supply) {
    require(s > 0, "transport: supplies must be positive");
    supply_total += s;
  }
  for (auto d : demand) {
    require(d > 0, "transport: demands must be positive");
    demand_total += d;
  }
  require(supply_total == demand_total, "transport: unbalanced marginals");
  for (auto c : cost) require(c >= 0 && c <= (std::int64_t{1} << 40), "transport: cost out of range");
  TransportationSimplex simplex(supply, demand, cost);
  return simplex.run();
}

}  // namespace kplane
