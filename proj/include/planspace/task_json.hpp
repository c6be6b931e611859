#pragma once

#include "planspace/error.hpp"
#include "planspace/task.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace planspace {

using json = nlohmann::json;

class TaskFormatError : public Error {
 public:
  TaskFormatError(const std::string& where, const std::string& msg)
      : Error(where + ": " + msg) {}
};

namespace detail {

// Characters reserved by the query text syntax and the variable-map sidecar.
inline void check_name(const std::string& name, const std::string& where) {
  if (name.empty()) throw TaskFormatError(where, "empty name");
  for (char c : name)
    if (c == ';' || c == '|' || c == '@' || c == ':' || c == '!' ||
        std::isspace(static_cast<unsigned char>(c)))
      throw TaskFormatError(where, "name '" + name +
                                       "' contains a reserved character");
}

using NameIndex = std::unordered_map<std::string, AtomId>;

inline PartialState read_partial(const json& j, const NameIndex& atoms,
                                 const std::string& where) {
  if (!j.is_object()) throw TaskFormatError(where, "expected an object");
  PartialState p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto found = atoms.find(it.key());
    if (found == atoms.end())
      throw TaskFormatError(where + "/" + it.key(), "unknown atom");
    const AtomId id = found->second;
    if (!it.value().is_boolean() && !it.value().is_number_integer())
      throw TaskFormatError(where + "/" + it.key(), "expected a boolean");
    bool v = it.value().is_boolean() ? it.value().get<bool>()
                                     : it.value().get<int>() != 0;
    p.emplace(id, v);
  }
  return p;
}

inline json write_partial(const PartialState& p, const PlanningTask& task) {
  json j = json::object();
  for (const auto& [a, v] : p) j[task.atoms[a].name] = v;
  return j;
}

}  // namespace detail

// Errors carry a JSON-pointer style position such as "/operators/2/pre/x".
inline PlanningTask task_from_json(const json& j) {
  if (!j.is_object()) throw TaskFormatError("/", "task must be a JSON object");
  for (const char* key : {"atoms", "operators", "init", "goal"})
    if (!j.contains(key)) throw TaskFormatError("/", std::string("missing '") + key + "'");

  PlanningTask task;
  detail::NameIndex atom_ids;
  const json& atoms = j.at("atoms");
  if (!atoms.is_array()) throw TaskFormatError("/atoms", "expected an array");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    std::string where = "/atoms/" + std::to_string(i);
    if (!atoms[i].is_string()) throw TaskFormatError(where, "expected a string");
    auto name = atoms[i].get<std::string>();
    detail::check_name(name, where);
    if (!atom_ids.emplace(name, static_cast<AtomId>(i)).second)
      throw TaskFormatError(where, "duplicate atom '" + name + "'");
    task.atoms.push_back({static_cast<AtomId>(i), name});
  }

  const json& ops = j.at("operators");
  if (!ops.is_array()) throw TaskFormatError("/operators", "expected an array");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::string where = "/operators/" + std::to_string(i);
    const json& o = ops[i];
    if (!o.is_object() || !o.contains("name") || !o.at("name").is_string())
      throw TaskFormatError(where, "expected an object with a string 'name'");
    Operator op;
    op.id = static_cast<OpId>(i);
    op.name = o.at("name").get<std::string>();
    detail::check_name(op.name, where + "/name");
    for (const auto& prev : task.operators)
      if (prev.name == op.name)
        throw TaskFormatError(where + "/name", "duplicate operator '" + op.name + "'");
    op.pre = detail::read_partial(o.value("pre", json::object()), atom_ids, where + "/pre");
    op.eff = detail::read_partial(o.value("eff", json::object()), atom_ids, where + "/eff");
    task.operators.push_back(std::move(op));
  }

  PartialState init = detail::read_partial(j.at("init"), atom_ids, "/init");
  if (init.size() != task.atoms.size()) {
    for (const auto& a : task.atoms)
      if (!init.count(a.id))
        throw TaskFormatError("/init", "initial state is not total: missing '" + a.name + "'");
  }
  task.init.assign(task.atoms.size(), false);
  for (const auto& [a, v] : init) task.init[a] = v;
  task.goal = detail::read_partial(j.at("goal"), atom_ids, "/goal");
  task.finalize();
  return task;
}

inline PlanningTask parse_task(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TaskFormatError("byte " + std::to_string(e.byte), e.what());
  }
  return task_from_json(j);
}

inline PlanningTask load_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open task file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_task(ss.str());
}

inline json task_to_json(const PlanningTask& task) {
  json j;
  j["atoms"] = json::array();
  for (const auto& a : task.atoms) j["atoms"].push_back(a.name);
  j["operators"] = json::array();
  for (const auto& o : task.operators)
    j["operators"].push_back({{"name", o.name},
                              {"pre", detail::write_partial(o.pre, task)},
                              {"eff", detail::write_partial(o.eff, task)}});
  PartialState init;
  for (std::size_t a = 0; a < task.init.size(); ++a)
    init.emplace(static_cast<AtomId>(a), task.init[a]);
  j["init"] = detail::write_partial(init, task);
  j["goal"] = detail::write_partial(task.goal, task);
  return j;
}

// Hex digest of the canonical serialization (compact dump, sorted keys).
inline std::string task_digest(const PlanningTask& task) {
  const std::size_t h = std::hash<std::string>{}(task_to_json(task).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016zx", h);
  return buf;
}

}  // namespace planspace
