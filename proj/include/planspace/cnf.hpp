#pragma once

#include "planspace/bigint.hpp"
#include "planspace/error.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace planspace {

using Var = std::uint32_t;

class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(Var var, bool positive) : var_(var), positive_(positive) {}

  static Lit from_dimacs(int d) {
    if (d == 0) throw ContractError("literal 0 is not a variable");
    return Lit(static_cast<Var>(std::abs(d)), d > 0);
  }

  constexpr Var var() const noexcept { return var_; }
  constexpr bool positive() const noexcept { return positive_; }
  int dimacs() const noexcept {
    return positive_ ? static_cast<int>(var_) : -static_cast<int>(var_);
  }
  constexpr Lit operator~() const noexcept { return Lit(var_, !positive_); }

  // Ordered by variable, negative literal first.
  constexpr auto operator<=>(const Lit& o) const noexcept {
    if (var_ != o.var_) return var_ <=> o.var_;
    return positive_ <=> o.positive_;
  }
  constexpr bool operator==(const Lit&) const noexcept = default;

 private:
  Var var_ = 0;
  bool positive_ = true;
};

inline std::ostream& operator<<(std::ostream& os, Lit l) { return os << l.dimacs(); }

// Canonical clause: literals sorted and deduplicated. Tautologies are
// rejected at construction.
class Clause {
 public:
  Clause() = default;
  Clause(std::initializer_list<int> dimacs) {
    for (int d : dimacs) lits_.push_back(Lit::from_dimacs(d));
    canonicalize();
  }
  explicit Clause(std::vector<Lit> lits) : lits_(std::move(lits)) { canonicalize(); }

  const std::vector<Lit>& lits() const noexcept { return lits_; }
  std::size_t size() const noexcept { return lits_.size(); }
  bool empty() const noexcept { return lits_.empty(); }
  auto begin() const noexcept { return lits_.begin(); }
  auto end() const noexcept { return lits_.end(); }
  Var max_var() const noexcept { return lits_.empty() ? 0 : lits_.back().var(); }

  bool operator==(const Clause&) const = default;
  auto operator<=>(const Clause& o) const { return lits_ <=> o.lits_; }

 private:
  void canonicalize() {
    for (Lit l : lits_)
      if (l.var() == 0) throw ContractError("variable 0 in clause");
    std::sort(lits_.begin(), lits_.end());
    lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    for (std::size_t i = 1; i < lits_.size(); ++i)
      if (lits_[i].var() == lits_[i - 1].var())
        throw ContractError("tautological clause on variable " +
                            std::to_string(lits_[i].var()));
  }

  std::vector<Lit> lits_;
};

class Cnf {
 public:
  Cnf() = default;
  explicit Cnf(std::size_t num_vars) : num_vars_(num_vars) {}
  Cnf(std::size_t num_vars, std::vector<Clause> clauses) : num_vars_(num_vars) {
    for (auto& c : clauses) add(std::move(c));
  }

  void add(Clause c) {
    if (c.max_var() > num_vars_)
      throw ContractError("literal variable " + std::to_string(c.max_var()) +
                          " exceeds " + std::to_string(num_vars_) + " variables");
    clauses_.push_back(std::move(c));
  }

  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_clauses() const noexcept { return clauses_.size(); }
  const std::vector<Clause>& clauses() const noexcept { return clauses_; }

  // The clause multiset sorted, so equality ignores clause order.
  Cnf canonical() const {
    Cnf r = *this;
    std::sort(r.clauses_.begin(), r.clauses_.end());
    return r;
  }

  bool operator==(const Cnf&) const = default;

 private:
  std::size_t num_vars_ = 0;
  std::vector<Clause> clauses_;
};

// Total assignment over variables 1..num_vars (index 0 unused).
class Model {
 public:
  Model() = default;
  explicit Model(std::size_t num_vars) : values_(num_vars + 1, false) {}

  static Model from_lits(std::size_t num_vars, const std::vector<Lit>& lits) {
    Model m(num_vars);
    for (Lit l : lits) m.set(l);
    return m;
  }

  std::size_t num_vars() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
  bool operator[](Var v) const { return values_.at(v); }
  void set(Lit l) { values_.at(l.var()) = l.positive(); }
  bool satisfies(Lit l) const { return (*this)[l.var()] == l.positive(); }

  bool satisfies(const Clause& c) const {
    return std::any_of(c.begin(), c.end(), [&](Lit l) { return satisfies(l); });
  }
  bool satisfies(const Cnf& f) const {
    return std::all_of(f.clauses().begin(), f.clauses().end(),
                       [&](const Clause& c) { return satisfies(c); });
  }

  std::vector<Lit> lits() const {
    std::vector<Lit> out;
    for (std::size_t v = 1; v < values_.size(); ++v)
      out.emplace_back(static_cast<Var>(v), values_[v]);
    return out;
  }

  bool operator==(const Model&) const = default;
  auto operator<=>(const Model& o) const { return values_ <=> o.values_; }

 private:
  std::vector<bool> values_;
};

// ---------------------------------------------------------------------------
// DIMACS

inline void write_dimacs(std::ostream& os, const Cnf& f) {
  os << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  for (const auto& c : f.clauses()) {
    for (Lit l : c) os << l.dimacs() << ' ';
    os << "0\n";
  }
}

inline std::string to_dimacs(const Cnf& f) {
  std::ostringstream os;
  write_dimacs(os, f);
  return os.str();
}

inline Cnf read_dimacs(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  long long num_vars = 0, num_clauses = 0;
  Cnf f;
  std::vector<Lit> pending;
  std::size_t pending_line = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c" || tok[0] == 'c' || tok == "%") continue;
    if (tok == "p") {
      std::string fmt;
      if (have_header) throw ParseError(lineno, "duplicate header");
      if (!(ls >> fmt >> num_vars >> num_clauses) || fmt != "cnf" ||
          num_vars < 0 || num_clauses < 0)
        throw ParseError(lineno, "malformed header, expected 'p cnf <vars> <clauses>'");
      if (ls >> tok) throw ParseError(lineno, "trailing tokens in header");
      have_header = true;
      f = Cnf(static_cast<std::size_t>(num_vars));
      continue;
    }
    if (!have_header) throw ParseError(lineno, "clause before header");
    ls.clear();
    ls.str(line);
    while (ls >> tok) {
      char* end = nullptr;
      long v = std::strtol(tok.c_str(), &end, 10);
      if (*end != '\0') throw ParseError(lineno, "invalid literal '" + tok + "'");
      if (v == 0) {
        try {
          f.add(Clause(std::move(pending)));
        } catch (const ContractError& e) {
          throw ParseError(pending_line ? pending_line : lineno, e.what());
        }
        pending.clear();
        pending_line = 0;
        continue;
      }
      if (std::labs(v) > num_vars)
        throw ParseError(lineno, "literal " + tok + " exceeds " +
                                     std::to_string(num_vars) + " variables");
      if (pending.empty()) pending_line = lineno;
      pending.push_back(Lit::from_dimacs(static_cast<int>(v)));
    }
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  if (!pending.empty()) throw ParseError(lineno, "unterminated clause");
  if (static_cast<long long>(f.num_clauses()) != num_clauses)
    throw ParseError(lineno, "header declares " + std::to_string(num_clauses) +
                                 " clauses, found " + std::to_string(f.num_clauses()));
  return f;
}

inline Cnf parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return read_dimacs(in);
}

// ---------------------------------------------------------------------------
// Unit propagation

enum class PropagationStatus { Ok, Conflict };

struct PropagationResult {
  PropagationStatus status = PropagationStatus::Ok;
  std::vector<Lit> implied;  // sorted; includes the assumptions
  Cnf residual;              // only meaningful when status == Ok
};

inline PropagationResult unit_propagate(const Cnf& f,
                                        const std::vector<Lit>& assumptions = {}) {
  PropagationResult r;
  std::vector<std::int8_t> value(f.num_vars() + 1, 0);
  auto val = [&](Lit l) -> int {
    int v = value[l.var()];
    return l.positive() ? v : -v;
  };
  auto conflict = [&] {
    r.status = PropagationStatus::Conflict;
    r.residual = Cnf(f.num_vars());
    std::sort(r.implied.begin(), r.implied.end());
    return r;
  };

  for (Lit l : assumptions) {
    if (l.var() == 0 || l.var() > f.num_vars())
      throw ContractError("assumption on unknown variable " + std::to_string(l.var()));
    if (val(l) < 0) return conflict();
    if (val(l) == 0) {
      value[l.var()] = l.positive() ? 1 : -1;
      r.implied.push_back(l);
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : f.clauses()) {
      std::size_t open = 0;
      Lit unit;
      bool sat = false;
      for (Lit l : c) {
        int v = val(l);
        if (v > 0) {
          sat = true;
          break;
        }
        if (v == 0) {
          ++open;
          unit = l;
        }
      }
      if (sat) continue;
      if (open == 0) return conflict();
      if (open == 1) {
        value[unit.var()] = unit.positive() ? 1 : -1;
        r.implied.push_back(unit);
        changed = true;
      }
    }
  }

  r.residual = Cnf(f.num_vars());
  for (const auto& c : f.clauses()) {
    std::vector<Lit> rest;
    bool sat = false;
    for (Lit l : c) {
      int v = val(l);
      if (v > 0) sat = true;
      if (v == 0) rest.push_back(l);
    }
    if (!sat) r.residual.add(Clause(std::move(rest)));
  }
  std::sort(r.implied.begin(), r.implied.end());
  return r;
}

// ---------------------------------------------------------------------------
// Reference model counter: plain Shannon splitting, no caching, no
// components. Kept deliberately naive so it can check the compiler.

struct BruteForceOptions {
  std::size_t max_vars = 30;
};

namespace detail {

inline BigInt split_count(std::vector<std::vector<int>> clauses,
                          std::size_t free_vars) {
  if (clauses.empty()) return pow2(free_vars);
  for (const auto& c : clauses)
    if (c.empty()) return 0;
  const int pivot = std::abs(clauses.front().front());
  // Variables that occur in no clause at all are already accounted for in
  // free_vars by the caller; the pivot is consumed here.
  BigInt total = 0;
  for (int lit : {pivot, -pivot}) {
    std::vector<std::vector<int>> next;
    next.reserve(clauses.size());
    for (const auto& c : clauses) {
      if (std::find(c.begin(), c.end(), lit) != c.end()) continue;
      std::vector<int> reduced;
      reduced.reserve(c.size());
      for (int x : c)
        if (x != -lit) reduced.push_back(x);
      next.push_back(std::move(reduced));
    }
    // Variables that vanished with satisfied clauses become free.
    std::vector<int> before, after;
    for (const auto& c : clauses)
      for (int x : c) before.push_back(std::abs(x));
    for (const auto& c : next)
      for (int x : c) after.push_back(std::abs(x));
    std::sort(before.begin(), before.end());
    before.erase(std::unique(before.begin(), before.end()), before.end());
    std::sort(after.begin(), after.end());
    after.erase(std::unique(after.begin(), after.end()), after.end());
    const std::size_t vanished = before.size() - 1 - after.size();
    total += split_count(std::move(next), free_vars + vanished);
  }
  return total;
}

}  // namespace detail

inline BigInt brute_force_count(const Cnf& f, const BruteForceOptions& opts = {}) {
  if (f.num_vars() > opts.max_vars)
    throw ConfigError("brute-force counting refused: " +
                      std::to_string(f.num_vars()) + " variables exceed the cap of " +
                      std::to_string(opts.max_vars));
  std::vector<std::vector<int>> clauses;
  std::vector<bool> seen(f.num_vars() + 1, false);
  for (const auto& c : f.clauses()) {
    std::vector<int> lits;
    for (Lit l : c) {
      lits.push_back(l.dimacs());
      seen[l.var()] = true;
    }
    clauses.push_back(std::move(lits));
  }
  std::size_t unused = 0;
  for (std::size_t v = 1; v <= f.num_vars(); ++v) unused += !seen[v];
  return detail::split_count(std::move(clauses), unused);
}

}  // namespace planspace
