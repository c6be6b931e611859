#pragma once

#include "planspace/bigint.hpp"
#include "planspace/cnf.hpp"
#include "planspace/compiler.hpp"
#include "planspace/ddnnf.hpp"
#include "planspace/encoder.hpp"
#include "planspace/error.hpp"
#include "planspace/nnf_io.hpp"
#include "planspace/query_text.hpp"
#include "planspace/reasoning.hpp"
#include "planspace/session.hpp"
#include "planspace/task.hpp"
#include "planspace/task_json.hpp"
