#pragma once

#include "planspace/task_json.hpp"

#include <string>

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(PLANSPACE_FIXTURES) + "/" + name;
}

inline planspace::PlanningTask pi1() { return planspace::load_task(fixture_path("pi1.json")); }

inline planspace::Plan plan_of(const planspace::PlanningTask& t,
                               std::initializer_list<const char*> names) {
  planspace::Plan p;
  for (const char* n : names) p.steps.push_back(t.op(n));
  return p;
}

}  // namespace testsupport
