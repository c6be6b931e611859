#pragma once

// A second plan enumerator, written without the library's execution helpers:
// breadth-first over operator sequences, states as bitmasks.

#include "planspace/task.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace testsupport {

inline std::set<planspace::Plan> bfs_plans(const planspace::PlanningTask& t, std::size_t bound) {
  auto mask_of = [&](const planspace::PartialState& p, bool want_true) {
    std::uint64_t m = 0;
    for (const auto& [a, v] : p)
      if (v == want_true) m |= std::uint64_t{1} << a;
    return m;
  };
  struct Op {
    std::uint64_t pre_t, pre_f, add, del;
  };
  std::vector<Op> ops;
  for (const auto& o : t.operators)
    ops.push_back({mask_of(o.pre, true), mask_of(o.pre, false), mask_of(o.eff, true),
                   mask_of(o.eff, false)});
  const std::uint64_t goal_t = mask_of(t.goal, true), goal_f = mask_of(t.goal, false);
  std::uint64_t s0 = 0;
  for (std::size_t a = 0; a < t.init.size(); ++a)
    if (t.init[a]) s0 |= std::uint64_t{1} << a;

  struct Node {
    std::uint64_t s;
    std::vector<planspace::OpId> seq;
  };
  std::set<planspace::Plan> out;
  std::vector<Node> layer{{s0, {}}};
  for (std::size_t depth = 0;; ++depth) {
    for (const auto& n : layer)
      if ((n.s & goal_t) == goal_t && (n.s & goal_f) == 0) out.insert(planspace::Plan{n.seq});
    if (depth == bound) break;
    std::vector<Node> next;
    for (const auto& n : layer)
      for (std::size_t i = 0; i < ops.size(); ++i) {
        const Op& o = ops[i];
        if ((n.s & o.pre_t) != o.pre_t || (n.s & o.pre_f) != 0) continue;
        Node m{(n.s & ~o.del) | o.add, n.seq};
        m.seq.push_back(static_cast<planspace::OpId>(i));
        next.push_back(std::move(m));
      }
    layer = std::move(next);
  }
  return out;
}

}  // namespace testsupport
