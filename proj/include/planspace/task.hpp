#pragma once

#include "planspace/bigint.hpp"
#include "planspace/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace planspace {

using AtomId = std::uint32_t;
using OpId = std::uint32_t;

struct Atom {
  AtomId id = 0;
  std::string name;
};

// Partial assignment of atoms. Ordered so iteration and serialization are
// deterministic.
using PartialState = std::map<AtomId, bool>;

// Total assignment, indexed by atom id.
using State = std::vector<bool>;

struct Operator {
  OpId id = 0;
  std::string name;
  PartialState pre;
  PartialState eff;
};

struct Plan {
  std::vector<OpId> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool operator==(const Plan&) const = default;
  auto operator<=>(const Plan&) const = default;
};

struct LengthBound {
  std::size_t value = 0;
};

inline bool satisfies(const State& s, const PartialState& p) {
  return std::all_of(p.begin(), p.end(), [&](const auto& kv) {
    return s[kv.first] == kv.second;
  });
}

class PlanningTask {
 public:
  std::vector<Atom> atoms;
  std::vector<Operator> operators;
  State init;
  PartialState goal;

  std::size_t num_atoms() const noexcept { return atoms.size(); }
  std::size_t num_operators() const noexcept { return operators.size(); }

  // Verifies dense ids, unique names, total init and in-range partial states.
  // Rebuilds the name indexes; call after mutating the public fields.
  void finalize() {
    atom_index_.clear();
    op_index_.clear();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].id != i)
        throw StructuralError("atom '" + atoms[i].name + "' has id " +
                              std::to_string(atoms[i].id) + ", expected " +
                              std::to_string(i));
      if (!atom_index_.emplace(atoms[i].name, atoms[i].id).second)
        throw StructuralError("duplicate atom name '" + atoms[i].name + "'");
    }
    for (std::size_t i = 0; i < operators.size(); ++i) {
      const auto& o = operators[i];
      if (o.id != i)
        throw StructuralError("operator '" + o.name + "' has id " +
                              std::to_string(o.id) + ", expected " +
                              std::to_string(i));
      if (!op_index_.emplace(o.name, o.id).second)
        throw StructuralError("duplicate operator name '" + o.name + "'");
      check_partial(o.pre, "precondition of '" + o.name + "'");
      check_partial(o.eff, "effect of '" + o.name + "'");
    }
    if (init.size() != atoms.size())
      throw StructuralError("initial state assigns " +
                            std::to_string(init.size()) + " of " +
                            std::to_string(atoms.size()) + " atoms");
    check_partial(goal, "goal");
  }

  std::optional<AtomId> find_atom(const std::string& name) const {
    auto it = atom_index_.find(name);
    if (it == atom_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<OpId> find_operator(const std::string& name) const {
    auto it = op_index_.find(name);
    if (it == op_index_.end()) return std::nullopt;
    return it->second;
  }

  AtomId atom(const std::string& name) const {
    if (auto id = find_atom(name)) return *id;
    throw StructuralError("unknown atom '" + name + "'");
  }

  OpId op(const std::string& name) const {
    if (auto id = find_operator(name)) return *id;
    throw StructuralError("unknown operator '" + name + "'");
  }

  const Operator& operator_at(OpId id) const {
    if (id >= operators.size())
      throw StructuralError("unknown operator id " + std::to_string(id));
    return operators[id];
  }

  // Polynomial cap on the length bound: factor * (|A| + |O|).
  std::size_t length_cap(std::size_t factor = 10) const noexcept {
    return factor * (atoms.size() + operators.size());
  }

  void check_bound(LengthBound bound, std::size_t cap_factor = 10) const {
    if (bound.value > length_cap(cap_factor))
      throw ConfigError("length bound " + std::to_string(bound.value) +
                        " exceeds cap " + std::to_string(length_cap(cap_factor)));
  }

  std::vector<std::string> operator_names(const std::vector<OpId>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (OpId id : ids) out.push_back(operator_at(id).name);
    return out;
  }

 private:
  void check_partial(const PartialState& p, const std::string& what) const {
    for (const auto& kv : p)
      if (kv.first >= atoms.size())
        throw StructuralError(what + " references unknown atom id " +
                              std::to_string(kv.first));
  }

  std::unordered_map<std::string, AtomId> atom_index_;
  std::unordered_map<std::string, OpId> op_index_;
};

inline void check_state(const PlanningTask& task, const State& s) {
  if (s.size() != task.num_atoms())
    throw StructuralError("state has " + std::to_string(s.size()) +
                          " values, task has " +
                          std::to_string(task.num_atoms()) + " atoms");
}

inline bool applicable(const PlanningTask& task, const State& s,
                       const Operator& o) {
  check_state(task, s);
  for (const auto& [a, v] : o.pre) {
    if (a >= task.num_atoms())
      throw StructuralError("precondition references unknown atom id " +
                            std::to_string(a));
    if (s[a] != v) return false;
  }
  return true;
}

inline State apply(const PlanningTask& task, const State& s, const Operator& o) {
  if (!applicable(task, s, o))
    throw ContractError("operator '" + o.name + "' is not applicable");
  State r = s;
  for (const auto& [a, v] : o.eff) {
    if (a >= task.num_atoms())
      throw StructuralError("effect references unknown atom id " +
                            std::to_string(a));
    r[a] = v;
  }
  return r;
}

// States s_0..s_n generated by the plan, or nullopt when some step is not
// applicable in the state it is reached in.
inline std::optional<std::vector<State>> simulate(const PlanningTask& task,
                                                  const Plan& plan) {
  std::vector<State> states{task.init};
  states.reserve(plan.size() + 1);
  for (OpId id : plan.steps) {
    const Operator& o = task.operator_at(id);
    if (!applicable(task, states.back(), o)) return std::nullopt;
    states.push_back(apply(task, states.back(), o));
  }
  return states;
}

inline bool validate_plan(const PlanningTask& task, const Plan& plan,
                          LengthBound bound) {
  for (OpId id : plan.steps) task.operator_at(id);
  if (plan.size() > bound.value) return false;
  auto states = simulate(task, plan);
  return states && satisfies(states->back(), task.goal);
}

// ---------------------------------------------------------------------------
// Queries

enum class QueryLitKind : std::uint8_t { AtomEver, OpEver, AtomAt, OpAt };

struct QueryLit {
  QueryLitKind kind = QueryLitKind::OpEver;
  std::uint32_t index = 0;  // atom or operator id
  std::size_t time = 0;     // only meaningful for AtomAt / OpAt
  bool positive = true;

  static QueryLit op_ever(OpId o, bool pos = true) {
    return {QueryLitKind::OpEver, o, 0, pos};
  }
  static QueryLit atom_ever(AtomId a, bool pos = true) {
    return {QueryLitKind::AtomEver, a, 0, pos};
  }
  static QueryLit op_at(OpId o, std::size_t i, bool pos = true) {
    return {QueryLitKind::OpAt, o, i, pos};
  }
  static QueryLit atom_at(AtomId a, std::size_t i, bool pos = true) {
    return {QueryLitKind::AtomAt, a, i, pos};
  }

  bool timed() const noexcept {
    return kind == QueryLitKind::AtomAt || kind == QueryLitKind::OpAt;
  }
  bool is_op() const noexcept {
    return kind == QueryLitKind::OpEver || kind == QueryLitKind::OpAt;
  }
  QueryLit negated() const {
    QueryLit r = *this;
    r.positive = !positive;
    return r;
  }
  bool operator==(const QueryLit&) const = default;
};

// Conjunction of clauses, each a disjunction of query literals.
struct Query {
  std::vector<std::vector<QueryLit>> clauses;

  static Query unit(QueryLit l) { return Query{{{l}}}; }

  // Clause union; a plan satisfies the result iff it satisfies both.
  Query operator&&(const Query& other) const {
    Query r = *this;
    r.clauses.insert(r.clauses.end(), other.clauses.begin(), other.clauses.end());
    return r;
  }
};

inline void check_query(const PlanningTask& task, const Query& q,
                        LengthBound bound) {
  for (const auto& clause : q.clauses) {
    for (const auto& l : clause) {
      if (l.is_op() ? l.index >= task.num_operators()
                    : l.index >= task.num_atoms())
        throw QueryError(std::string("query references unknown ") +
                         (l.is_op() ? "operator" : "atom") + " id " +
                         std::to_string(l.index));
      if (l.kind == QueryLitKind::AtomAt && l.time > bound.value)
        throw QueryError("atom time index " + std::to_string(l.time) +
                         " outside 0.." + std::to_string(bound.value));
      if (l.kind == QueryLitKind::OpAt && l.time >= bound.value)
        throw QueryError("operator step " + std::to_string(l.time) +
                         " outside 0.." +
                         (bound.value == 0 ? std::string("(none)")
                                           : std::to_string(bound.value - 1)));
    }
  }
}

// Satisfaction of a query by a plan. States past the end of the plan stay at
// the final state, matching the padded steps of the bounded encoding.
inline bool plan_satisfies_query(const PlanningTask& task, const Plan& plan,
                                 const Query& q, LengthBound bound) {
  check_query(task, q, bound);
  auto states = simulate(task, plan);
  if (!states) throw ContractError("plan is not executable");
  auto holds = [&](const QueryLit& l) {
    switch (l.kind) {
      case QueryLitKind::AtomEver:
        return std::any_of(states->begin(), states->end(),
                           [&](const State& s) { return s[l.index]; });
      case QueryLitKind::OpEver:
        return std::find(plan.steps.begin(), plan.steps.end(), l.index) !=
               plan.steps.end();
      case QueryLitKind::AtomAt:
        return bool((*states)[std::min(l.time, plan.size())][l.index]);
      case QueryLitKind::OpAt:
        return l.time < plan.size() && plan.steps[l.time] == l.index;
    }
    return false;
  };
  return std::all_of(q.clauses.begin(), q.clauses.end(), [&](const auto& c) {
    return std::any_of(c.begin(), c.end(),
                       [&](const QueryLit& l) { return holds(l) == l.positive; });
  });
}

// ---------------------------------------------------------------------------
// Brute-force plan enumeration

struct OracleOptions {
  std::optional<std::size_t> limit;
  std::optional<std::chrono::milliseconds> time_budget;
};

struct OracleResult {
  std::vector<Plan> plans;
  bool truncated = false;
};

// Depth-first walk over all applicable operator sequences of length <= bound,
// operators tried in id order. `visit` returns false to stop early. Returns
// false iff the walk was cut short (by `visit` or by the time budget).
inline bool for_each_plan(const PlanningTask& task, LengthBound bound,
                          const std::function<bool(const Plan&)>& visit,
                          std::optional<std::chrono::milliseconds> budget = {}) {
  using Clock = std::chrono::steady_clock;
  const auto deadline =
      budget ? std::optional(Clock::now() + *budget) : std::nullopt;
  Plan prefix;
  std::size_t ticks = 0;
  bool stopped = false;

  std::function<void(const State&)> dfs = [&](const State& s) {
    if (stopped) return;
    if (deadline && (ticks++ & 0x3ff) == 0 && Clock::now() >= *deadline) {
      stopped = true;
      return;
    }
    if (satisfies(s, task.goal) && !visit(prefix)) {
      stopped = true;
      return;
    }
    if (prefix.size() == bound.value) return;
    for (const Operator& o : task.operators) {
      if (!satisfies(s, o.pre)) continue;
      State next = s;
      for (const auto& [a, v] : o.eff) next[a] = v;
      prefix.steps.push_back(o.id);
      dfs(next);
      prefix.steps.pop_back();
      if (stopped) return;
    }
  };
  dfs(task.init);
  return !stopped;
}

inline OracleResult enumerate_plans_oracle(const PlanningTask& task,
                                           LengthBound bound,
                                           const OracleOptions& opts = {}) {
  task.check_bound(bound);
  OracleResult r;
  bool complete = for_each_plan(
      task, bound,
      [&](const Plan& p) {
        if (opts.limit && r.plans.size() >= *opts.limit) return false;
        r.plans.push_back(p);
        return true;
      },
      opts.time_budget);
  r.truncated = !complete;
  return r;
}

struct OracleStats {
  BigInt count = 0;
  std::set<OpId> brave;
  std::set<OpId> cautious;
  bool no_plans = true;
};

inline OracleStats oracle_stats(const PlanningTask& task, LengthBound bound) {
  task.check_bound(bound);
  OracleStats st;
  for_each_plan(task, bound, [&](const Plan& p) {
    std::set<OpId> used(p.steps.begin(), p.steps.end());
    st.brave.insert(used.begin(), used.end());
    if (st.no_plans) {
      st.cautious = used;
    } else {
      std::set<OpId> keep;
      std::set_intersection(st.cautious.begin(), st.cautious.end(), used.begin(),
                            used.end(), std::inserter(keep, keep.end()));
      st.cautious = std::move(keep);
    }
    st.no_plans = false;
    ++st.count;
    return true;
  });
  return st;
}

}  // namespace planspace
