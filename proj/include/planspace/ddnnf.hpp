#pragma once

#include "planspace/bigint.hpp"
#include "planspace/cnf.hpp"
#include "planspace/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace planspace {

// Fixed-universe set of variables 1..n backed by 64-bit words.
class VarSet {
 public:
  VarSet() = default;
  explicit VarSet(std::size_t num_vars) : words_((num_vars + 64) / 64, 0), n_(num_vars) {}

  static VarSet all(std::size_t num_vars) {
    VarSet s(num_vars);
    for (Var v = 1; v <= num_vars; ++v) s.insert(v);
    return s;
  }

  std::size_t universe() const noexcept { return n_; }
  void insert(Var v) { words_.at(v >> 6) |= bit(v); }
  void erase(Var v) { words_.at(v >> 6) &= ~bit(v); }
  bool contains(Var v) const {
    return (v >> 6) < words_.size() && (words_[v >> 6] & bit(v)) != 0;
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  std::size_t count_and(const VarSet& o) const noexcept {
    std::size_t c = 0;
    const std::size_t n = std::min(words_.size(), o.words_.size());
    for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return c;
  }
  bool intersects(const VarSet& o) const noexcept { return count_and(o) != 0; }
  bool subset_of(const VarSet& o) const noexcept { return count_and(o) == count(); }

  VarSet& operator|=(const VarSet& o) {
    if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    n_ = std::max(n_, o.n_);
    return *this;
  }

  std::vector<Var> to_vector() const {
    std::vector<Var> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        out.push_back(static_cast<Var>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
        w &= w - 1;
      }
    }
    return out;
  }

  bool operator==(const VarSet& o) const { return to_vector() == o.to_vector(); }

 private:
  static std::uint64_t bit(Var v) noexcept { return std::uint64_t{1} << (v & 63); }

  std::vector<std::uint64_t> words_;
  std::size_t n_ = 0;
};

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { True, False, Literal, And, Decision };

// Decision nodes denote (var AND hi) OR (NOT var AND lo); children = {hi, lo}.
struct NnfNode {
  NodeKind kind = NodeKind::True;
  Lit lit;               // Literal
  Var var = 0;           // Decision
  std::vector<NodeId> children;
};

// Rooted DAG in decision-DNNF. Nodes are stored in topological order: every
// child id is smaller than its parent's id. Supports are kept per node.
class Ddnnf {
 public:
  Ddnnf() = default;
  explicit Ddnnf(std::size_t num_vars) : num_vars_(num_vars) {}

  NodeId add_true() { return push({NodeKind::True, {}, 0, {}}, VarSet(num_vars_)); }
  NodeId add_false() { return push({NodeKind::False, {}, 0, {}}, VarSet(num_vars_)); }

  NodeId add_literal(Lit l) {
    check_var(l.var());
    VarSet s(num_vars_);
    s.insert(l.var());
    return push({NodeKind::Literal, l, 0, {}}, std::move(s));
  }

  NodeId add_and(std::vector<NodeId> children) {
    VarSet s(num_vars_);
    for (NodeId c : children) s |= support(check_child(c));
    return push({NodeKind::And, {}, 0, std::move(children)}, std::move(s));
  }

  NodeId add_decision(Var var, NodeId hi, NodeId lo) {
    check_var(var);
    VarSet s(num_vars_);
    s.insert(var);
    s |= support(check_child(hi));
    s |= support(check_child(lo));
    return push({NodeKind::Decision, {}, var, {hi, lo}}, std::move(s));
  }

  void set_root(NodeId id) { root_ = check_child(id); }

  NodeId root() const {
    if (!root_) throw ContractError("d-DNNF has no root");
    return *root_;
  }
  bool has_root() const noexcept { return root_.has_value(); }
  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept {
    std::size_t e = 0;
    for (const auto& n : nodes_) e += n.children.size();
    return e;
  }
  const NnfNode& node(NodeId id) const { return nodes_.at(id); }
  const VarSet& support(NodeId id) const { return supports_.at(id); }

 private:
  void check_var(Var v) const {
    if (v == 0 || v > num_vars_)
      throw ContractError("variable " + std::to_string(v) + " outside 1.." +
                          std::to_string(num_vars_));
  }
  NodeId check_child(NodeId c) const {
    if (c >= nodes_.size()) throw ContractError("dangling node id " + std::to_string(c));
    return c;
  }
  NodeId push(NnfNode n, VarSet s) {
    nodes_.push_back(std::move(n));
    supports_.push_back(std::move(s));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::size_t num_vars_ = 0;
  std::vector<NnfNode> nodes_;
  std::vector<VarSet> supports_;
  std::optional<NodeId> root_;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { Cycle, Decomposability, Decision, Support, Root } kind;
  NodeId node;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(Violation::Kind k) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == k; }));
  }
};

// Recomputes supports from the structure instead of trusting the stored ones.
inline ValidationReport validate(const Ddnnf& d) {
  ValidationReport r;
  const std::size_t n = d.num_nodes();
  std::vector<VarSet> supp(n, VarSet(d.num_vars()));
  if (!d.has_root()) r.violations.push_back({Violation::Kind::Root, 0, "no root"});
  for (NodeId id = 0; id < n; ++id) {
    const NnfNode& node = d.node(id);
    bool cyclic = false;
    for (NodeId c : node.children)
      if (c >= id) {
        cyclic = true;
        r.violations.push_back({Violation::Kind::Cycle, id,
                                "child " + std::to_string(c) + " does not precede node " +
                                    std::to_string(id)});
      }
    if (cyclic) continue;
    switch (node.kind) {
      case NodeKind::True:
      case NodeKind::False: break;
      case NodeKind::Literal: supp[id].insert(node.lit.var()); break;
      case NodeKind::And:
        for (std::size_t i = 0; i < node.children.size(); ++i) {
          for (std::size_t j = i + 1; j < node.children.size(); ++j) {
            if (supp[node.children[i]].intersects(supp[node.children[j]]))
              r.violations.push_back({Violation::Kind::Decomposability, id,
                                      "children " + std::to_string(node.children[i]) + " and " +
                                          std::to_string(node.children[j]) + " share variables"});
          }
          supp[id] |= supp[node.children[i]];
        }
        break;
      case NodeKind::Decision:
        if (node.children.size() != 2) {
          r.violations.push_back({Violation::Kind::Decision, id, "decision node needs two children"});
          break;
        }
        for (NodeId c : node.children) {
          if (supp[c].contains(node.var))
            r.violations.push_back({Violation::Kind::Decision, id,
                                    "decision variable " + std::to_string(node.var) +
                                        " occurs in branch " + std::to_string(c)});
          supp[id] |= supp[c];
        }
        supp[id].insert(node.var);
        break;
    }
    if (!(supp[id] == d.support(id)))
      r.violations.push_back({Violation::Kind::Support, id, "stored support differs"});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Counting graph

namespace detail {

inline VarSet assumption_vars(std::size_t num_vars, const std::vector<Lit>& assumptions,
                              std::vector<std::int8_t>& value) {
  VarSet s(num_vars);
  value.assign(num_vars + 1, 0);
  for (Lit l : assumptions) {
    if (l.var() == 0 || l.var() > num_vars)
      throw ContractError("assumption on unknown variable " + std::to_string(l.var()));
    std::int8_t v = l.positive() ? 1 : -1;
    if (value[l.var()] == -v)
      throw ContractError("contradictory assumptions on variable " + std::to_string(l.var()));
    value[l.var()] = v;
    s.insert(l.var());
  }
  return s;
}

}  // namespace detail

// Per-node model counts of a d-DNNF conditioned on a set of literals. val(N)
// counts assignments to the non-assumed variables of support(N); literal
// leaves contradicting an assumption get 0, and variables a decision branch
// does not mention are counted as free (2 each) unless assumed.
class CountingGraph {
 public:
  CountingGraph(const Ddnnf& d, const std::vector<Lit>& assumptions = {})
      : d_(&d), val_(d.num_nodes()), free_(d.num_nodes(), 0) {
    assumed_ = detail::assumption_vars(d.num_vars(), assumptions, value_);
    for (NodeId id = 0; id < d.num_nodes(); ++id) {
      const NnfNode& n = d.node(id);
      free_[id] = d.support(id).count() - d.support(id).count_and(assumed_);
      switch (n.kind) {
        case NodeKind::True: val_[id] = 1; break;
        case NodeKind::False: val_[id] = 0; break;
        case NodeKind::Literal: {
          std::int8_t a = value_[n.lit.var()];
          val_[id] = (a == 0 || (a > 0) == n.lit.positive()) ? 1 : 0;
          break;
        }
        case NodeKind::And: {
          BigInt p = 1;
          for (NodeId c : n.children) {
            p *= val_[c];
            if (p == 0) break;
          }
          val_[id] = std::move(p);
          break;
        }
        case NodeKind::Decision:
          val_[id] = branch_weight(id, true) + branch_weight(id, false);
          break;
      }
    }
  }

  const Ddnnf& ddnnf() const noexcept { return *d_; }
  const BigInt& val(NodeId id) const { return val_.at(id); }
  const VarSet& assumed() const noexcept { return assumed_; }
  // +1 / -1 when assumed true / false, 0 otherwise.
  std::int8_t assumed_value(Var v) const { return value_.at(v); }

  // Weight of one branch of a decision node: the branch count scaled by the
  // free variables of the node that the branch leaves unmentioned.
  BigInt branch_weight(NodeId id, bool hi) const {
    const NnfNode& n = d_->node(id);
    std::int8_t a = value_[n.var];
    if (a != 0 && (a > 0) != hi) return 0;
    const NodeId c = n.children[hi ? 0 : 1];
    const std::size_t gap = free_[id] - (a == 0 ? 1 : 0) - free_[c];
    BigInt w = val_[c];
    if (w != 0) w <<= gap;
    return w;
  }

  // Count over `over` (must contain support(root)).
  BigInt count(const VarSet& over) const {
    const NodeId root = d_->root();
    if (!d_->support(root).subset_of(over))
      throw ContractError("counting set does not contain the root support");
    std::size_t free_outside = over.count() - over.count_and(assumed_) - free_[root];
    BigInt r = val_[root];
    if (r != 0) r <<= free_outside;
    return r;
  }
  BigInt count() const { return count(VarSet::all(d_->num_vars())); }

 private:
  const Ddnnf* d_;
  std::vector<BigInt> val_;
  std::vector<std::size_t> free_;
  VarSet assumed_;
  std::vector<std::int8_t> value_;
};

inline BigInt count(const Ddnnf& d) { return CountingGraph(d).count(); }
inline BigInt count(const Ddnnf& d, const VarSet& over) { return CountingGraph(d).count(over); }

inline BigInt conditioned_count(const Ddnnf& d, const std::vector<Lit>& assumptions) {
  return CountingGraph(d, assumptions).count();
}
inline BigInt conditioned_count(const Ddnnf& d, const std::vector<Lit>& assumptions,
                                const VarSet& over) {
  return CountingGraph(d, assumptions).count(over);
}

// Like conditioned_count, but a contradictory assumption set counts 0.
inline BigInt count_or_zero(const Ddnnf& d, std::vector<Lit> assumptions) {
  std::sort(assumptions.begin(), assumptions.end());
  for (std::size_t i = 1; i < assumptions.size(); ++i)
    if (assumptions[i].var() == assumptions[i - 1].var() &&
        assumptions[i].positive() != assumptions[i - 1].positive())
      return 0;
  return conditioned_count(d, assumptions);
}

struct Backbone {
  std::vector<Var> core;  // true in every model
  std::vector<Var> dead;  // false in every model
};

inline Backbone backbone(const Ddnnf& d, const std::vector<Var>& vars,
                         const std::vector<Lit>& assumptions = {}) {
  if (count_or_zero(d, assumptions) == 0) throw NoModelsError("backbone of an unsatisfiable d-DNNF");
  Backbone b;
  for (Var v : vars) {
    auto with = [&](bool pos) {
      auto a = assumptions;
      a.emplace_back(v, pos);
      return count_or_zero(d, std::move(a));
    };
    if (with(false) == 0) b.core.push_back(v);
    else if (with(true) == 0) b.dead.push_back(v);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Sampling and enumeration

namespace detail {

template <class Rng>
BigInt uniform_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw ContractError("empty sampling range");
  const std::size_t bits = boost::multiprecision::msb(bound) + 1;
  for (;;) {
    BigInt r = 0;
    for (std::size_t done = 0; done < bits; done += 64) {
      r <<= 64;
      r += rng();
    }
    r >>= (bits + 63) / 64 * 64 - bits;
    if (r < bound) return r;
  }
}

}  // namespace detail

// n independent uniform draws over the models of d (under the assumptions),
// each a total assignment of variables 1..num_vars. Deterministic per seed.
inline std::vector<Model> sample(const Ddnnf& d, std::size_t n, std::uint64_t seed,
                                 const std::vector<Lit>& assumptions = {}) {
  CountingGraph g(d, assumptions);
  if (g.count() == 0) throw NoModelsError("cannot sample from an unsatisfiable d-DNNF");
  std::mt19937_64 rng(seed);
  std::vector<Model> out;
  out.reserve(n);
  const std::size_t nv = d.num_vars();

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::int8_t> value(nv + 1, 0);
    auto assign_free = [&](Var v) {
      std::int8_t a = g.assumed_value(v);
      value[v] = a != 0 ? a : ((rng() & 1) ? 1 : -1);
    };
    std::vector<NodeId> stack{d.root()};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      const NnfNode& node = d.node(id);
      switch (node.kind) {
        case NodeKind::True:
        case NodeKind::False: break;
        case NodeKind::Literal: value[node.lit.var()] = node.lit.positive() ? 1 : -1; break;
        case NodeKind::And:
          for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
          break;
        case NodeKind::Decision: {
          BigInt w_hi = g.branch_weight(id, true);
          BigInt w_lo = g.branch_weight(id, false);
          bool hi = detail::uniform_below(w_hi + w_lo, rng) < w_hi;
          NodeId c = node.children[hi ? 0 : 1];
          value[node.var] = hi ? 1 : -1;
          for (Var v : d.support(id).to_vector())
            if (v != node.var && !d.support(c).contains(v)) assign_free(v);
          stack.push_back(c);
          break;
        }
      }
    }
    Model m(nv);
    for (Var v = 1; v <= nv; ++v) {
      if (value[v] == 0) assign_free(v);
      m.set(Lit(v, value[v] > 0));
    }
    out.push_back(std::move(m));
  }
  return out;
}

struct Enumeration {
  std::vector<Model> models;
  bool truncated = false;
};

// Models in a fixed order: hi branches before lo, free variables counted up
// from all-false. Stops after `limit` models.
inline Enumeration enumerate(const Ddnnf& d, std::size_t limit,
                             const std::vector<Lit>& assumptions = {}) {
  CountingGraph g(d, assumptions);
  Enumeration out;
  const BigInt total = g.count();
  out.truncated = total > limit;
  if (total == 0 || limit == 0) return out;
  const std::size_t nv = d.num_vars();

  // Work items are either nodes still to expand or blocks of free variables.
  struct Item {
    std::optional<NodeId> node;
    std::vector<Var> free;
  };
  std::vector<std::int8_t> value(nv + 1, 0);
  bool done = false;

  std::function<void(std::vector<Item>)> expand = [&](std::vector<Item> todo) {
    if (done) return;
    if (todo.empty()) {
      Model m(nv);
      for (Var v = 1; v <= nv; ++v) m.set(Lit(v, value[v] > 0));
      out.models.push_back(std::move(m));
      done = out.models.size() >= limit;
      return;
    }
    Item item = std::move(todo.back());
    todo.pop_back();
    if (!item.node) {
      std::vector<Var> open;
      for (Var v : item.free) {
        if (g.assumed_value(v) != 0) value[v] = g.assumed_value(v);
        else open.push_back(v);
      }
      // Binary counter over the open variables, all-false first.
      for (Var v : open) value[v] = -1;
      for (;;) {
        expand(todo);
        if (done) break;
        std::size_t i = 0;
        while (i < open.size() && value[open[i]] > 0) value[open[i++]] = -1;
        if (i == open.size()) break;
        value[open[i]] = 1;
      }
      for (Var v : item.free) value[v] = 0;
      return;
    }
    const NodeId id = *item.node;
    const NnfNode& node = d.node(id);
    switch (node.kind) {
      case NodeKind::False: return;
      case NodeKind::True: expand(std::move(todo)); return;
      case NodeKind::Literal:
        value[node.lit.var()] = node.lit.positive() ? 1 : -1;
        expand(std::move(todo));
        value[node.lit.var()] = 0;
        return;
      case NodeKind::And:
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
          todo.push_back({*it, {}});
        expand(std::move(todo));
        return;
      case NodeKind::Decision:
        for (bool hi : {true, false}) {
          if (done || g.branch_weight(id, hi) == 0) continue;
          const NodeId c = node.children[hi ? 0 : 1];
          std::vector<Var> gap;
          for (Var v : d.support(id).to_vector())
            if (v != node.var && !d.support(c).contains(v)) gap.push_back(v);
          auto next = todo;
          next.push_back({std::nullopt, std::move(gap)});
          next.push_back({c, {}});
          value[node.var] = hi ? 1 : -1;
          expand(std::move(next));
          value[node.var] = 0;
        }
        return;
    }
  };

  std::vector<Var> outside;
  for (Var v = 1; v <= nv; ++v)
    if (!d.support(d.root()).contains(v)) outside.push_back(v);
  std::vector<Item> start;
  start.push_back({std::nullopt, std::move(outside)});
  start.push_back({d.root(), {}});
  expand(std::move(start));
  return out;
}

}  // namespace planspace
