#pragma once

#include "planspace/cnf.hpp"
#include "planspace/error.hpp"
#include "planspace/task.hpp"
#include "planspace/task_json.hpp"

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace planspace {

enum class TagKind : std::uint8_t { AtomAt, OpAt, OpInd, AtomInd };

// Meaning of one encoding variable. `time` is the state layer (AtomAt) or the
// operator step (OpAt); unused for indicators.
struct VarTag {
  TagKind kind = TagKind::AtomAt;
  std::uint32_t index = 0;
  std::size_t time = 0;

  bool operator==(const VarTag&) const = default;
};

// Bijection between encoding variables and tags. Layout, 1-based:
//   AtomAt(a, i)  for layers 0..L, layer-major
//   OpAt(o, i)    for steps 0..L-1, step-major
//   OpInd(o), AtomInd(a) when indicators are requested
class VarMap {
 public:
  VarMap() = default;
  VarMap(std::size_t num_atoms, std::size_t num_ops, std::size_t length,
         bool with_indicators)
      : atoms_(num_atoms), ops_(num_ops), length_(length), indicators_(with_indicators) {}

  std::size_t num_vars() const noexcept {
    return ind_base() + (indicators_ ? ops_ + atoms_ : 0);
  }
  bool has_indicators() const noexcept { return indicators_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t num_atoms() const noexcept { return atoms_; }
  std::size_t num_operators() const noexcept { return ops_; }

  Var atom_at(AtomId a, std::size_t layer) const {
    if (a >= atoms_ || layer > length_)
      throw ContractError("no variable for atom " + std::to_string(a) + " at layer " +
                          std::to_string(layer));
    return static_cast<Var>(1 + layer * atoms_ + a);
  }
  Var op_at(OpId o, std::size_t step) const {
    if (o >= ops_ || step >= length_)
      throw ContractError("no variable for operator " + std::to_string(o) + " at step " +
                          std::to_string(step));
    return static_cast<Var>(1 + op_base() + step * ops_ + o);
  }
  Var op_ind(OpId o) const {
    if (!indicators_) throw ConfigError("encoding has no indicator variables");
    if (o >= ops_) throw ContractError("no indicator for operator " + std::to_string(o));
    return static_cast<Var>(1 + ind_base() + o);
  }
  Var atom_ind(AtomId a) const {
    if (!indicators_) throw ConfigError("encoding has no indicator variables");
    if (a >= atoms_) throw ContractError("no indicator for atom " + std::to_string(a));
    return static_cast<Var>(1 + ind_base() + ops_ + a);
  }

  VarTag tag(Var v) const {
    if (v == 0 || v > num_vars())
      throw ContractError("variable " + std::to_string(v) + " is not in the encoding");
    std::size_t x = v - 1;
    if (x < op_base())
      return {TagKind::AtomAt, static_cast<std::uint32_t>(x % atoms_), x / atoms_};
    x -= op_base();
    if (x < ind_base() - op_base())
      return {TagKind::OpAt, static_cast<std::uint32_t>(x % ops_), x / ops_};
    x -= ind_base() - op_base();
    if (x < ops_) return {TagKind::OpInd, static_cast<std::uint32_t>(x), 0};
    return {TagKind::AtomInd, static_cast<std::uint32_t>(x - ops_), 0};
  }

  // Branching hint for the compiler: state layer i ranks 2i, step i ranks
  // 2i + 1, indicators come last. Indexed by variable; entry 0 is unused.
  std::vector<std::uint32_t> time_ranks() const {
    std::vector<std::uint32_t> r(num_vars() + 1, static_cast<std::uint32_t>(2 * length_ + 2));
    for (Var v = 1; v <= ind_base(); ++v) {
      const VarTag t = tag(v);
      r[v] = static_cast<std::uint32_t>(2 * t.time + (t.kind == TagKind::OpAt ? 1 : 0));
    }
    return r;
  }

  Var var(const VarTag& t) const {
    switch (t.kind) {
      case TagKind::AtomAt: return atom_at(t.index, t.time);
      case TagKind::OpAt: return op_at(t.index, t.time);
      case TagKind::OpInd: return op_ind(t.index);
      case TagKind::AtomInd: return atom_ind(t.index);
    }
    throw ContractError("bad tag");
  }

 private:
  std::size_t op_base() const noexcept { return atoms_ * (length_ + 1); }
  std::size_t ind_base() const noexcept { return op_base() + ops_ * length_; }

  std::size_t atoms_ = 0;
  std::size_t ops_ = 0;
  std::size_t length_ = 0;
  bool indicators_ = false;
};

struct Encoding {
  Cnf cnf;
  VarMap varmap;
  LengthBound bound;
  std::string task_hash;
};

struct EncodeOptions {
  bool with_indicators = true;
  std::size_t cap_factor = 10;
};

// Sequential encoding whose models are in one-to-one correspondence with the
// plans of length <= bound. Clause groups, in emission order: initial state,
// goal, at-most-one operator per step, preconditions, effects, explanatory
// frame axioms, padding of unused steps to the end, and (optionally) the
// indicator biconditionals.
inline Encoding encode(const PlanningTask& task, LengthBound bound,
                       const EncodeOptions& opts = {}) {
  task.check_bound(bound, opts.cap_factor);
  const std::size_t L = bound.value;
  const std::size_t nA = task.num_atoms();
  const std::size_t nO = task.num_operators();
  Encoding enc{Cnf(), VarMap(nA, nO, L, opts.with_indicators), bound, task_digest(task)};
  const VarMap& vm = enc.varmap;
  Cnf f(vm.num_vars());
  auto lit = [](Var v, bool pos) { return Lit(v, pos); };

  for (AtomId a = 0; a < nA; ++a) f.add(Clause({lit(vm.atom_at(a, 0), task.init[a])}));

  for (const auto& [a, v] : task.goal) f.add(Clause({lit(vm.atom_at(a, L), v)}));

  for (std::size_t i = 0; i < L; ++i)
    for (OpId o = 0; o < nO; ++o)
      for (OpId p = o + 1; p < nO; ++p)
        f.add(Clause({lit(vm.op_at(o, i), false), lit(vm.op_at(p, i), false)}));

  for (std::size_t i = 0; i < L; ++i)
    for (const auto& o : task.operators)
      for (const auto& [a, v] : o.pre)
        f.add(Clause({lit(vm.op_at(o.id, i), false), lit(vm.atom_at(a, i), v)}));

  for (std::size_t i = 0; i < L; ++i)
    for (const auto& o : task.operators)
      for (const auto& [a, v] : o.eff)
        f.add(Clause({lit(vm.op_at(o.id, i), false), lit(vm.atom_at(a, i + 1), v)}));

  // A change of atom a between layers i and i+1 needs an operator at step i
  // whose effect produces the new value.
  for (std::size_t i = 0; i < L; ++i) {
    for (AtomId a = 0; a < nA; ++a) {
      for (bool becomes : {true, false}) {
        std::vector<Lit> c{lit(vm.atom_at(a, i), becomes),
                           lit(vm.atom_at(a, i + 1), !becomes)};
        for (const auto& o : task.operators) {
          auto e = o.eff.find(a);
          if (e != o.eff.end() && e->second == becomes) c.push_back(lit(vm.op_at(o.id, i), true));
        }
        f.add(Clause(std::move(c)));
      }
    }
  }

  // An empty step i forces an empty step i+1.
  for (std::size_t i = 0; i + 1 < L; ++i) {
    for (OpId q = 0; q < nO; ++q) {
      std::vector<Lit> c;
      for (OpId o = 0; o < nO; ++o) c.push_back(lit(vm.op_at(o, i), true));
      c.push_back(lit(vm.op_at(q, i + 1), false));
      f.add(Clause(std::move(c)));
    }
  }

  if (opts.with_indicators) {
    for (OpId o = 0; o < nO; ++o) {
      std::vector<Lit> some{lit(vm.op_ind(o), false)};
      for (std::size_t i = 0; i < L; ++i) {
        f.add(Clause({lit(vm.op_at(o, i), false), lit(vm.op_ind(o), true)}));
        some.push_back(lit(vm.op_at(o, i), true));
      }
      f.add(Clause(std::move(some)));
    }
    for (AtomId a = 0; a < nA; ++a) {
      std::vector<Lit> some{lit(vm.atom_ind(a), false)};
      for (std::size_t i = 0; i <= L; ++i) {
        f.add(Clause({lit(vm.atom_at(a, i), false), lit(vm.atom_ind(a), true)}));
        some.push_back(lit(vm.atom_at(a, i), true));
      }
      f.add(Clause(std::move(some)));
    }
  }

  enc.cnf = std::move(f);
  return enc;
}

inline Plan decode_model(const Encoding& enc, const Model& model) {
  const VarMap& vm = enc.varmap;
  if (model.num_vars() < vm.num_vars())
    throw ContractError("model covers " + std::to_string(model.num_vars()) + " of " +
                        std::to_string(vm.num_vars()) + " encoding variables");
  Plan plan;
  bool ended = false;
  for (std::size_t i = 0; i < vm.length(); ++i) {
    std::optional<OpId> chosen;
    for (OpId o = 0; o < vm.num_operators(); ++o) {
      if (!model[vm.op_at(o, i)]) continue;
      if (chosen)
        throw CorruptionError("model selects two operators at step " + std::to_string(i));
      chosen = o;
    }
    if (!chosen) {
      ended = true;
      continue;
    }
    if (ended)
      throw CorruptionError("model selects an operator at step " + std::to_string(i) +
                            " after an empty step");
    plan.steps.push_back(*chosen);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Queries over the encoding

enum class QueryClass { Term, GeneralCnf };

inline QueryClass classify_query(const Query& q) {
  for (const auto& c : q.clauses)
    if (c.size() != 1) return QueryClass::GeneralCnf;
  return QueryClass::Term;
}

inline Lit query_literal(const QueryLit& l, const VarMap& vm) {
  Var v = 0;
  switch (l.kind) {
    case QueryLitKind::AtomEver: v = vm.atom_ind(l.index); break;
    case QueryLitKind::OpEver: v = vm.op_ind(l.index); break;
    case QueryLitKind::AtomAt: v = vm.atom_at(l.index, l.time); break;
    case QueryLitKind::OpAt: v = vm.op_at(l.index, l.time); break;
  }
  return Lit(v, l.positive);
}

// Clauses over the encoding's variables. Tautological query clauses are always
// satisfied and are dropped.
inline std::vector<Clause> encode_query(const PlanningTask& task, const Query& q,
                                        const Encoding& enc) {
  check_query(task, q, enc.bound);
  std::vector<Clause> out;
  for (const auto& c : q.clauses) {
    std::vector<Lit> lits;
    for (const auto& l : c) {
      if (!l.timed() && !enc.varmap.has_indicators())
        throw ConfigError("query uses an 'ever' literal but the encoding has no indicators");
      lits.push_back(query_literal(l, enc.varmap));
    }
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    bool tautology = false;
    for (std::size_t i = 1; i < lits.size(); ++i)
      tautology |= lits[i].var() == lits[i - 1].var();
    if (!tautology) out.emplace_back(std::move(lits));
  }
  return out;
}

inline std::string tag_text(const VarTag& t, const PlanningTask& task) {
  switch (t.kind) {
    case TagKind::AtomAt:
      return "AtomAt(" + task.atoms.at(t.index).name + "," + std::to_string(t.time) + ")";
    case TagKind::OpAt:
      return "OpAt(" + task.operators.at(t.index).name + "," + std::to_string(t.time) + ")";
    case TagKind::OpInd: return "OpInd(" + task.operators.at(t.index).name + ")";
    case TagKind::AtomInd: return "AtomInd(" + task.atoms.at(t.index).name + ")";
  }
  return {};
}

// Sidecar variable map: one line "v <id> <tag>" per variable.
inline void write_varmap(std::ostream& os, const Encoding& enc, const PlanningTask& task) {
  for (Var v = 1; v <= enc.varmap.num_vars(); ++v)
    os << "v " << v << ' ' << tag_text(enc.varmap.tag(v), task) << '\n';
}

}  // namespace planspace
