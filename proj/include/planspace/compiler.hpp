#pragma once

#include "planspace/cnf.hpp"
#include "planspace/ddnnf.hpp"
#include "planspace/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace planspace {

struct CompileOptions {
  std::size_t max_nodes = 10'000'000;
  std::chrono::milliseconds time_budget{300'000};
  bool use_cache = true;
  // Optional per-variable rank (index 0 unused). Branching takes the lowest
  // ranked open variable of a component first.
  std::vector<std::uint32_t> var_rank;
};

struct CompileStats {
  std::size_t decisions = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_entries = 0;
};

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const noexcept {
    std::size_t h = k.size();
    for (auto x : k) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Exhaustive DPLL that records its search as a decision-DNNF: unit
// propagation yields literal leaves, independent components become AND
// nodes, and each branch variable becomes a decision node.
//
// Residual clauses are always an original clause minus falsified literals, so
// a component is identified by its unassigned variables plus the ids of its
// clauses that lost literals; that pair is the (lossless) cache key.
class Compiler {
 public:
  Compiler(const Cnf& f, const CompileOptions& opts)
      : opts_(opts),
        nv_(f.num_vars()),
        value_(nv_ + 1, 0),
        occ_(2 * (nv_ + 1)),
        out_(nv_),
        stamp_(nv_ + 1, 0),
        parent_(nv_ + 1, 0),
        score_(nv_ + 1, 0),
        start_(std::chrono::steady_clock::now()) {
    clauses_.reserve(f.num_clauses());
    for (const auto& c : f.clauses()) {
      std::vector<Lit> lits(c.begin(), c.end());
      for (Lit l : lits) occ_[code(l)].push_back(static_cast<std::uint32_t>(clauses_.size()));
      clauses_.push_back(std::move(lits));
    }
    true_ = out_.add_true();
    false_ = out_.add_false();
  }

  Ddnnf run() {
    std::vector<std::uint32_t> ids(clauses_.size());
    std::iota(ids.begin(), ids.end(), 0u);
    out_.set_root(compile(ids, 0, true));
    stats_.cache_entries = cache_.size();
    return std::move(out_);
  }

  const CompileStats& stats() const noexcept { return stats_; }

 private:
  static std::size_t code(Lit l) noexcept { return 2 * l.var() + (l.positive() ? 1 : 0); }

  int val(Lit l) const noexcept {
    int v = value_[l.var()];
    return l.positive() ? v : -v;
  }

  void assign(Lit l) {
    value_[l.var()] = l.positive() ? 1 : -1;
    trail_.push_back(l);
  }

  void undo(std::size_t to) {
    while (trail_.size() > to) {
      value_[trail_.back().var()] = 0;
      trail_.pop_back();
    }
  }

  // 1 satisfied, 0 open with >= 2 unassigned, -1 conflict, 2 unit (in *unit).
  int status(std::uint32_t cid, Lit* unit) const {
    std::size_t open = 0;
    for (Lit l : clauses_[cid]) {
      int v = val(l);
      if (v > 0) return 1;
      if (v == 0) {
        ++open;
        *unit = l;
      }
    }
    if (open == 0) return -1;
    return open == 1 ? 2 : 0;
  }

  bool propagate(std::size_t head) {
    while (head < trail_.size()) {
      const Lit falsified = ~trail_[head++];
      for (std::uint32_t cid : occ_[code(falsified)]) {
        Lit unit;
        switch (status(cid, &unit)) {
          case -1: return false;
          case 2: assign(unit); break;
          default: break;
        }
      }
    }
    return true;
  }

  void tick() {
    if (out_.num_nodes() > opts_.max_nodes)
      throw BudgetExceeded("compilation exceeded " + std::to_string(opts_.max_nodes) + " nodes");
    if ((++calls_ & 0xff) == 0 &&
        std::chrono::steady_clock::now() - start_ > opts_.time_budget)
      throw BudgetExceeded("compilation exceeded " +
                           std::to_string(opts_.time_budget.count()) + " ms");
  }

  NodeId compile(const std::vector<std::uint32_t>& ids, std::size_t queue_start,
                 bool initial_scan) {
    tick();
    const std::size_t leaf_start = trail_.size();
    if (initial_scan) {
      for (std::uint32_t cid : ids) {
        Lit unit;
        int s = status(cid, &unit);
        if (s == -1) return conflict(leaf_start);
        if (s == 2) assign(unit);
      }
    }
    if (!propagate(queue_start)) return conflict(leaf_start);

    std::vector<NodeId> children;
    for (std::size_t i = leaf_start; i < trail_.size(); ++i) children.push_back(literal(trail_[i]));

    std::vector<std::uint32_t> active;
    for (std::uint32_t cid : ids) {
      Lit unit;
      if (status(cid, &unit) != 1) active.push_back(cid);
    }

    for (auto& comp : components(active)) {
      NodeId n = compile_component(comp);
      if (n == false_) return conflict(leaf_start);
      children.push_back(n);
    }
    undo(leaf_start);
    return make_and(std::move(children));
  }

  NodeId conflict(std::size_t to) {
    undo(to);
    return false_;
  }

  std::vector<std::vector<std::uint32_t>> components(const std::vector<std::uint32_t>& active) {
    ++epoch_;
    auto find = [&](Var v) {
      while (parent_[v] != v) {
        parent_[v] = parent_[parent_[v]];
        v = parent_[v];
      }
      return v;
    };
    auto touch = [&](Var v) {
      if (stamp_[v] != epoch_) {
        stamp_[v] = epoch_;
        parent_[v] = v;
      }
    };
    for (std::uint32_t cid : active) {
      Var first = 0;
      for (Lit l : clauses_[cid]) {
        if (value_[l.var()] != 0) continue;
        touch(l.var());
        if (first == 0) {
          first = l.var();
          continue;
        }
        Var a = find(first), b = find(l.var());
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
      }
    }
    std::vector<std::vector<std::uint32_t>> comps;
    std::unordered_map<Var, std::size_t> index;
    for (std::uint32_t cid : active) {
      Var rep = 0;
      for (Lit l : clauses_[cid])
        if (value_[l.var()] == 0) {
          rep = find(l.var());
          break;
        }
      auto [it, fresh] = index.emplace(rep, comps.size());
      if (fresh) comps.emplace_back();
      comps[it->second].push_back(cid);
    }
    return comps;
  }

  std::vector<std::uint32_t> cache_key(const std::vector<std::uint32_t>& comp) {
    ++epoch_;
    std::vector<Var> vars;
    std::vector<std::uint32_t> shortened;
    for (std::uint32_t cid : comp) {
      bool lost = false;
      for (Lit l : clauses_[cid]) {
        if (value_[l.var()] != 0) {
          lost = true;
        } else if (stamp_[l.var()] != epoch_) {
          stamp_[l.var()] = epoch_;
          vars.push_back(l.var());
        }
      }
      if (lost) shortened.push_back(cid);
    }
    std::sort(vars.begin(), vars.end());
    std::vector<std::uint32_t> key;
    key.push_back(0);  // number of runs, patched below
    for (std::size_t i = 0; i < vars.size();) {
      std::size_t j = i + 1;
      while (j < vars.size() && vars[j] == vars[j - 1] + 1) ++j;
      key.push_back(vars[i]);
      key.push_back(static_cast<std::uint32_t>(j - i));
      ++key[0];
      i = j;
    }
    key.insert(key.end(), shortened.begin(), shortened.end());
    return key;
  }

  std::uint32_t rank(Var v) const noexcept {
    return v < opts_.var_rank.size() ? opts_.var_rank[v] : 0;
  }

  // Lowest rank first, then most occurrences in the shortest residual clauses
  // holding such a variable; ties to the lowest var.
  Var choose(const std::vector<std::uint32_t>& comp) {
    std::uint32_t low = UINT32_MAX;
    for (std::uint32_t cid : comp)
      for (Lit l : clauses_[cid])
        if (value_[l.var()] == 0) low = std::min(low, rank(l.var()));
    auto eligible = [&](std::uint32_t cid) {
      return std::any_of(clauses_[cid].begin(), clauses_[cid].end(),
                         [&](Lit l) { return value_[l.var()] == 0 && rank(l.var()) == low; });
    };
    std::size_t shortest = SIZE_MAX;
    for (std::uint32_t cid : comp) {
      if (!eligible(cid)) continue;
      std::size_t open = 0;
      for (Lit l : clauses_[cid]) open += value_[l.var()] == 0;
      shortest = std::min(shortest, open);
    }
    std::vector<Var> touched;
    for (std::uint32_t cid : comp) {
      std::size_t open = 0;
      for (Lit l : clauses_[cid]) open += value_[l.var()] == 0;
      if (open != shortest || !eligible(cid)) continue;
      for (Lit l : clauses_[cid]) {
        if (value_[l.var()] != 0 || rank(l.var()) != low) continue;
        if (score_[l.var()]++ == 0) touched.push_back(l.var());
      }
    }
    Var best = 0;
    for (Var v : touched) {
      if (best == 0 || score_[v] > score_[best] || (score_[v] == score_[best] && v < best)) best = v;
    }
    for (Var v : touched) score_[v] = 0;
    return best;
  }

  NodeId compile_component(const std::vector<std::uint32_t>& comp) {
    std::vector<std::uint32_t> key;
    if (opts_.use_cache) {
      key = cache_key(comp);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ++stats_.cache_hits;
        return it->second;
      }
    }
    const Var x = choose(comp);
    ++stats_.decisions;
    NodeId branch[2];
    for (int hi = 1; hi >= 0; --hi) {
      const std::size_t mark = trail_.size();
      assign(Lit(x, hi == 1));
      branch[hi] = compile(comp, mark, false);
      undo(mark);
    }
    NodeId n = make_decision(x, branch[1], branch[0]);
    if (opts_.use_cache) cache_.emplace(std::move(key), n);
    return n;
  }

  NodeId literal(Lit l) {
    auto [it, fresh] = literals_.try_emplace(code(l), 0);
    if (fresh) it->second = out_.add_literal(l);
    return it->second;
  }

  NodeId make_and(std::vector<NodeId> children) {
    std::erase(children, true_);
    if (std::find(children.begin(), children.end(), false_) != children.end()) return false_;
    if (children.empty()) return true_;
    if (children.size() == 1) return children.front();
    std::sort(children.begin(), children.end());
    auto it = ands_.find(children);
    if (it != ands_.end()) return it->second;
    NodeId n = out_.add_and(children);
    ands_.emplace(std::move(children), n);
    return n;
  }

  NodeId make_decision(Var x, NodeId hi, NodeId lo) {
    if (hi == false_ && lo == false_) return false_;
    auto key = std::make_tuple(x, hi, lo);
    auto it = decisions_.find(key);
    if (it != decisions_.end()) return it->second;
    NodeId n = out_.add_decision(x, hi, lo);
    decisions_.emplace(key, n);
    return n;
  }

  CompileOptions opts_;
  std::size_t nv_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::int8_t> value_;
  std::vector<Lit> trail_;
  std::vector<std::vector<std::uint32_t>> occ_;
  Ddnnf out_;
  NodeId true_ = 0, false_ = 0;

  std::vector<std::uint32_t> stamp_;
  std::vector<Var> parent_;
  std::vector<std::uint32_t> score_;
  std::uint32_t epoch_ = 0;

  std::unordered_map<std::size_t, NodeId> literals_;
  std::map<std::vector<NodeId>, NodeId> ands_;
  std::map<std::tuple<Var, NodeId, NodeId>, NodeId> decisions_;
  std::unordered_map<std::vector<std::uint32_t>, NodeId, KeyHash> cache_;

  CompileStats stats_;
  std::size_t calls_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline Ddnnf compile(const Cnf& f, const CompileOptions& opts = {},
                     CompileStats* stats = nullptr) {
  detail::Compiler c(f, opts);
  Ddnnf d = c.run();
  if (stats) *stats = c.stats();
  return d;
}

}  // namespace planspace
