#pragma once

#include "planspace/reasoning.hpp"
#include "planspace/task_json.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace planspace {

struct FacetRow {
  Facet facet;
  Probability significance;
};

struct Snapshot {
  BigInt count;
  std::vector<Commitment> commitments;
  std::vector<FacetRow> facets;
  std::vector<Plan> samples;
};

struct SessionOptions {
  std::size_t sample_count = 3;
  std::uint64_t seed = 0;
};

inline Snapshot take_snapshot(const PlanView& view, const SessionOptions& opts) {
  Snapshot s;
  s.count = view.count();
  s.commitments = view.commitments();
  for (const Facet& f : view.facets().all()) s.facets.push_back({f, view.significance(f)});
  if (!view.empty() && opts.sample_count > 0) s.samples = view.sample_plans(opts.sample_count, opts.seed);
  return s;
}

// A user's accumulated commitments over one plan space. Not synchronized:
// callers serialize mutations (the service holds a per-session lock).
class NavSession {
 public:
  NavSession(std::shared_ptr<const PlanSpace> space, SessionOptions opts = {}, std::string id = {})
      : id_(std::move(id)), opts_(opts) {
    PlanView root(std::move(space));
    Snapshot snap = take_snapshot(root, opts_);
    steps_.push_back({std::move(root), std::move(snap)});
  }

  const std::string& id() const noexcept { return id_; }
  const PlanView& view() const noexcept { return steps_.back().view; }
  const Snapshot& snapshot() const noexcept { return steps_.back().snapshot; }
  const PlanSpace& space() const noexcept { return view().space(); }
  std::size_t depth() const noexcept { return steps_.size() - 1; }

  // Throws CommitmentError for inconsistent commitments and for ones that
  // would leave no plan; the session is unchanged in both cases.
  const Snapshot& commit(const Commitment& c) {
    PlanView next = view().enforce(c);
    if (next.empty()) throw CommitmentError("would eliminate all plans", c);
    Snapshot snap = take_snapshot(next, opts_);
    steps_.push_back({std::move(next), std::move(snap)});
    return snapshot();
  }

  const Snapshot& undo() {
    if (steps_.size() == 1) throw ContractError("nothing to undo");
    steps_.pop_back();
    return snapshot();
  }

 private:
  struct Step {
    PlanView view;
    Snapshot snapshot;
  };

  std::string id_;
  SessionOptions opts_;
  std::vector<Step> steps_;
};

// ---------------------------------------------------------------------------
// JSON

inline json probability_to_json(const Probability& p) {
  return {{"num", p.num.str()}, {"den", p.den.str()}};
}

inline const char* commitment_kind_name(Commitment::Kind k) {
  switch (k) {
    case Commitment::Kind::Enforce: return "enforce";
    case Commitment::Kind::Forbid: return "forbid";
    case Commitment::Kind::Prefix: return "prefix";
  }
  return "?";
}

inline json commitment_to_json(const Commitment& c, const PlanningTask& task) {
  json j = {{"kind", commitment_kind_name(c.kind)}, {"op", task.operator_at(c.op).name}};
  if (c.kind == Commitment::Kind::Prefix) j["step"] = c.step;
  return j;
}

class MalformedRequest : public Error {
 public:
  using Error::Error;
};

inline Commitment commitment_from_json(const json& j, const PlanningTask& task) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string() || !j.contains("op") ||
      !j["op"].is_string())
    throw MalformedRequest("commitment needs string fields 'kind' and 'op'");
  const auto kind = j["kind"].get<std::string>();
  const auto name = j["op"].get<std::string>();
  auto op = task.find_operator(name);
  if (!op) throw MalformedRequest("unknown operator '" + name + "'");
  if (kind == "enforce") return Commitment::enforce(*op);
  if (kind == "forbid") return Commitment::forbid(*op);
  if (kind == "prefix") {
    if (!j.contains("step") || !j["step"].is_number_integer() || j["step"].get<long long>() < 0)
      throw MalformedRequest("prefix commitment needs a non-negative integer 'step'");
    return Commitment::prefix(j["step"].get<std::size_t>(), *op);
  }
  throw MalformedRequest("unknown commitment kind '" + kind + "'");
}

inline json plan_to_json(const Plan& p, const PlanningTask& task) {
  return task.operator_names(p.steps);
}

inline json facet_row_to_json(const FacetRow& r, const PlanningTask& task) {
  return {{"op", task.operator_at(r.facet.op).name},
          {"sign", r.facet.sign == FacetSign::Inclusive ? "inclusive" : "excluding"},
          {"significance", probability_to_json(r.significance)}};
}

inline json snapshot_to_json(const Snapshot& s, const PlanningTask& task) {
  json j;
  j["count"] = s.count.str();
  j["commitments"] = json::array();
  for (const auto& c : s.commitments) j["commitments"].push_back(commitment_to_json(c, task));
  j["facets"] = json::array();
  for (const auto& r : s.facets) j["facets"].push_back(facet_row_to_json(r, task));
  j["samples"] = json::array();
  for (const auto& p : s.samples) j["samples"].push_back(plan_to_json(p, task));
  return j;
}

}  // namespace planspace
