#pragma once

#include "planspace/bigint.hpp"
#include "planspace/compiler.hpp"
#include "planspace/ddnnf.hpp"
#include "planspace/encoder.hpp"
#include "planspace/error.hpp"
#include "planspace/task.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace planspace {

// Exact rational in lowest terms with den >= 1.
struct Probability {
  BigInt num = 0;
  BigInt den = 1;

  // satisfying / max(1, total)
  static Probability of(const BigInt& satisfying, const BigInt& total) {
    Probability p{satisfying, total < 1 ? BigInt(1) : total};
    BigInt g = boost::multiprecision::gcd(p.num, p.den);
    if (g > 1) {
      p.num /= g;
      p.den /= g;
    }
    return p;
  }

  bool equals(const BigInt& n, const BigInt& d) const { return num * d == n * den; }
  double approx() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return num.str() + "/" + den.str(); }

  bool operator==(const Probability&) const = default;
  bool operator<(const Probability& o) const { return num * o.den < o.num * den; }
};

enum class FacetSign : std::uint8_t { Inclusive, Excluding };

struct Facet {
  OpId op = 0;
  FacetSign sign = FacetSign::Inclusive;

  Facet negated() const {
    return {op, sign == FacetSign::Inclusive ? FacetSign::Excluding : FacetSign::Inclusive};
  }
  bool operator==(const Facet&) const = default;
};

// Inclusive facets; every inclusive facet o has the excluding facet NOT o.
struct FacetSet {
  std::vector<OpId> inclusive;

  std::size_t size() const noexcept { return 2 * inclusive.size(); }
  bool empty() const noexcept { return inclusive.empty(); }
  bool contains(OpId o) const {
    return std::binary_search(inclusive.begin(), inclusive.end(), o);
  }
  std::vector<Facet> all() const {
    std::vector<Facet> out;
    for (OpId o : inclusive) {
      out.push_back({o, FacetSign::Inclusive});
      out.push_back({o, FacetSign::Excluding});
    }
    return out;
  }
};

struct Commitment {
  enum class Kind : std::uint8_t { Enforce, Forbid, Prefix };
  Kind kind = Kind::Enforce;
  OpId op = 0;
  std::size_t step = 0;  // Prefix only

  static Commitment enforce(OpId o) { return {Kind::Enforce, o, 0}; }
  static Commitment forbid(OpId o) { return {Kind::Forbid, o, 0}; }
  static Commitment prefix(std::size_t i, OpId o) { return {Kind::Prefix, o, i}; }
  static Commitment from(const Facet& f) {
    return f.sign == FacetSign::Inclusive ? enforce(f.op) : forbid(f.op);
  }

  bool operator==(const Commitment&) const = default;
};

class CommitmentError : public Error {
 public:
  CommitmentError(const std::string& reason, Commitment c) : Error(reason), commitment_(c) {}
  const Commitment& commitment() const noexcept { return commitment_; }

 private:
  Commitment commitment_;
};

class UndefinedSignificance : public Error {
 public:
  UndefinedSignificance() : Error("significance is undefined: the plan space has no facets") {}
};

struct PlanSpaceOptions {
  CompileOptions compile;
  std::size_t cap_factor = 10;
};

// A task, a length bound, the encoding with indicators and its compiled
// d-DNNF. Immutable once built.
class PlanSpace {
 public:
  PlanSpace(PlanningTask task, LengthBound bound, const PlanSpaceOptions& opts = {})
      : task_(std::move(task)), bound_(bound), opts_(opts) {
    EncodeOptions eo;
    eo.with_indicators = true;
    eo.cap_factor = opts.cap_factor;
    encoding_ = encode(task_, bound_, eo);
    if (opts_.compile.var_rank.empty()) opts_.compile.var_rank = encoding_.varmap.time_ranks();
    ddnnf_ = compile(encoding_.cnf, opts_.compile);
    count_ = planspace::count(ddnnf_);
  }

  const PlanningTask& task() const noexcept { return task_; }
  LengthBound bound() const noexcept { return bound_; }
  const Encoding& encoding() const noexcept { return encoding_; }
  const Ddnnf& ddnnf() const noexcept { return ddnnf_; }
  const BigInt& count() const noexcept { return count_; }
  const PlanSpaceOptions& options() const noexcept { return opts_; }

 private:
  PlanningTask task_;
  LengthBound bound_;
  PlanSpaceOptions opts_;
  Encoding encoding_;
  Ddnnf ddnnf_;
  BigInt count_;
};

inline std::shared_ptr<const PlanSpace> build_plan_space(PlanningTask task, LengthBound bound,
                                                         const PlanSpaceOptions& opts = {}) {
  return std::make_shared<const PlanSpace>(std::move(task), bound, opts);
}

struct PlanList {
  std::vector<Plan> plans;
  bool truncated = false;
};

// The plan space conditioned on a list of commitments. Shares the compiled
// d-DNNF; every query is a conditioned traversal under the commitment
// literals (or a recompilation for non-term queries).
class PlanView {
 public:
  explicit PlanView(std::shared_ptr<const PlanSpace> space)
      : space_(std::move(space)), count_(space_->count()) {}

  const PlanSpace& space() const noexcept { return *space_; }
  std::shared_ptr<const PlanSpace> space_ptr() const noexcept { return space_; }
  const std::vector<Commitment>& commitments() const noexcept { return commitments_; }
  const std::vector<Lit>& assumptions() const noexcept { return lits_; }
  const BigInt& count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  Lit literal(const Commitment& c) const {
    const VarMap& vm = space_->encoding().varmap;
    switch (c.kind) {
      case Commitment::Kind::Enforce: return Lit(vm.op_ind(c.op), true);
      case Commitment::Kind::Forbid: return Lit(vm.op_ind(c.op), false);
      case Commitment::Kind::Prefix: return Lit(vm.op_at(c.op, c.step), true);
    }
    throw ContractError("bad commitment");
  }

  // Rejects commitments inconsistent with the ones already made. A consistent
  // commitment that leaves no plan yields an empty view.
  PlanView enforce(const Commitment& c) const {
    const PlanningTask& task = space_->task();
    if (c.op >= task.num_operators())
      throw CommitmentError("unknown operator id " + std::to_string(c.op), c);
    const std::string name = task.operators[c.op].name;
    std::size_t prefix_len = 0;
    for (const auto& old : commitments_) {
      if (old.kind == Commitment::Kind::Prefix) {
        ++prefix_len;
        if (c.kind == Commitment::Kind::Prefix && old.step == c.step)
          throw CommitmentError("step " + std::to_string(c.step) + " is already fixed", c);
        continue;
      }
      if (old.op == c.op && c.kind != Commitment::Kind::Prefix && old.kind != c.kind)
        throw CommitmentError("'" + name + "' cannot be both enforced and forbidden", c);
    }
    if (c.kind == Commitment::Kind::Prefix) {
      if (c.step >= space_->bound().value)
        throw CommitmentError("step " + std::to_string(c.step) + " is beyond the length bound", c);
      if (c.step != prefix_len)
        throw CommitmentError("prefix steps must be fixed in order; next step is " +
                                  std::to_string(prefix_len),
                              c);
    }
    PlanView v = *this;
    v.commitments_.push_back(c);
    v.lits_.push_back(literal(c));
    v.count_ = count_or_zero(space_->ddnnf(), v.lits_);
    return v;
  }

  PlanView enforce(const Facet& f) const { return enforce(Commitment::from(f)); }

  bool plan_exists() const { return count_ >= 1; }
  bool top_k_exists(const BigInt& k) const { return count_ >= k; }

  // Count of plans additionally satisfying `extra`; contradictions count 0.
  BigInt count_with(const std::vector<Lit>& extra) const {
    auto all = lits_;
    all.insert(all.end(), extra.begin(), extra.end());
    return count_or_zero(space_->ddnnf(), std::move(all));
  }

  std::vector<OpId> brave() const {
    std::vector<OpId> out;
    if (empty()) return out;
    for (OpId o = 0; o < space_->task().num_operators(); ++o)
      if (count_with({ind(o, true)}) >= 1) out.push_back(o);
    return out;
  }

  // Empty when the view has no plans.
  std::vector<OpId> cautious() const {
    std::vector<OpId> out;
    if (empty()) return out;
    for (OpId o = 0; o < space_->task().num_operators(); ++o)
      if (count_with({ind(o, false)}) == 0) out.push_back(o);
    return out;
  }

  // Operators on the indicator backbone are fixed; every other one is a facet.
  FacetSet facets() const {
    FacetSet fs;
    if (empty()) return fs;
    const VarMap& vm = space_->encoding().varmap;
    std::vector<Var> vars;
    for (OpId o = 0; o < space_->task().num_operators(); ++o) vars.push_back(vm.op_ind(o));
    Backbone b = backbone(space_->ddnnf(), vars, lits_);
    std::vector<Var> fixed = b.core;
    fixed.insert(fixed.end(), b.dead.begin(), b.dead.end());
    std::sort(fixed.begin(), fixed.end());
    for (OpId o = 0; o < space_->task().num_operators(); ++o)
      if (!std::binary_search(fixed.begin(), fixed.end(), vm.op_ind(o))) fs.inclusive.push_back(o);
    return fs;
  }

  bool facet_reason(OpId o) const { return facets().contains(o); }
  bool at_least_k_facets(std::size_t k) const { return facets().size() >= k; }
  bool at_most_k_facets(std::size_t k) const { return facets().size() <= k; }
  bool exact_k_facets(std::size_t k) const { return facets().size() == k; }

  // (|FA| - |FA of the view with p enforced|) / |FA|
  Probability significance(const Facet& p) const {
    const std::size_t before = facets().size();
    if (before == 0) throw UndefinedSignificance();
    const Commitment c = Commitment::from(p);
    if (c.op >= space_->task().num_operators())
      throw ContractError("unknown operator id " + std::to_string(c.op));
    PlanView narrowed = *this;
    narrowed.commitments_.push_back(c);
    narrowed.lits_.push_back(literal(c));
    narrowed.count_ = count_or_zero(space_->ddnnf(), narrowed.lits_);
    const std::size_t after = narrowed.facets().size();
    return Probability::of(BigInt(before - after), BigInt(before));
  }

  // |plans in this view satisfying q|. Terms are answered by conditioning;
  // general CNF queries by compiling the encoding conjoined with the query.
  BigInt query_count(const Query& q) const {
    const Encoding& enc = space_->encoding();
    std::vector<Clause> clauses = encode_query(space_->task(), q, enc);
    if (classify_query(q) == QueryClass::Term) {
      std::vector<Lit> extra;
      for (const auto& c : clauses) extra.push_back(c.lits().front());
      return count_with(extra);
    }
    Cnf f = enc.cnf;
    for (auto& c : clauses) f.add(std::move(c));
    for (Lit l : lits_) f.add(Clause(std::vector<Lit>{l}));
    return planspace::count(compile(f, space_->options().compile));
  }

  Probability probability(const Query& q) const { return Probability::of(query_count(q), count_); }

  // d * |AP(Q)| == n * max(1, |AP|), evaluated exactly.
  bool prob_equals(const Query& q, const BigInt& n, const BigInt& d) const {
    if (d < 1) throw ContractError("probability denominator must be >= 1");
    const BigInt denom = count_ < 1 ? BigInt(1) : count_;
    return d * query_count(q) == n * denom;
  }

  PlanList enumerate_plans(std::size_t limit) const {
    Enumeration e = enumerate(space_->ddnnf(), limit, lits_);
    PlanList out;
    out.truncated = e.truncated;
    for (const auto& m : e.models) out.plans.push_back(decode_model(space_->encoding(), m));
    return out;
  }

  std::vector<Plan> sample_plans(std::size_t n, std::uint64_t seed) const {
    if (empty()) throw NoModelsError("cannot sample: the plan space is empty");
    std::vector<Plan> out;
    for (const auto& m : sample(space_->ddnnf(), n, seed, lits_))
      out.push_back(decode_model(space_->encoding(), m));
    return out;
  }

 private:
  Lit ind(OpId o, bool pos) const { return Lit(space_->encoding().varmap.op_ind(o), pos); }

  std::shared_ptr<const PlanSpace> space_;
  std::vector<Commitment> commitments_;
  std::vector<Lit> lits_;
  BigInt count_;
};

inline PlanView root_view(std::shared_ptr<const PlanSpace> space) {
  return PlanView(std::move(space));
}

}  // namespace planspace
