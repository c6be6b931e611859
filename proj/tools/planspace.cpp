#include "planspace/compiler.hpp"
#include "planspace/nnf_io.hpp"
#include "planspace/query_text.hpp"
#include "planspace/reasoning.hpp"
#include "planspace/service.hpp"
#include "planspace/session.hpp"
#include "planspace/task_json.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace planspace;

namespace {

enum Exit { kOk = 0, kUsage = 1, kBudget = 2, kNoPlans = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

class NoPlans : public Error {
 public:
  using Error::Error;
};

struct Config {
  std::string task_path;
  std::optional<std::size_t> length;
  std::optional<double> factor;
  std::optional<std::size_t> base;
  std::string format = "human";
  std::string emit_cnf;
  std::string emit_nnf;
};

bool json_mode(const Config& c) { return c.format == "json"; }

std::size_t env_size(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  errno = 0;
  unsigned long long x = std::strtoull(v, &end, 10);
  if (errno || *end || v[0] == '-') throw UsageError(std::string(name) + " must be a non-negative integer");
  return static_cast<std::size_t>(x);
}

PlanSpaceOptions space_options() {
  PlanSpaceOptions o;
  o.compile.max_nodes = env_size("PLANSPACE_MAX_NODES", o.compile.max_nodes);
  o.compile.time_budget = std::chrono::milliseconds(
      env_size("PLANSPACE_TIME_BUDGET_MS", static_cast<std::size_t>(o.compile.time_budget.count())));
  return o;
}

LengthBound resolve_bound(const Config& c) {
  if (c.length && c.factor) throw UsageError("give either --length or --factor, not both");
  if (c.length) {
    if (c.base) throw UsageError("--base only applies with --factor");
    return {*c.length};
  }
  if (!c.factor) throw UsageError("a length bound is required: --length N or --factor F --base B");
  if (!c.base) throw UsageError("--factor requires --base");
  if (*c.factor < 0) throw UsageError("--factor must be non-negative");
  return {static_cast<std::size_t>(std::floor(*c.factor * static_cast<double>(*c.base)))};
}

PlanningTask load(const Config& c) {
  if (c.task_path.empty()) throw UsageError("--task is required");
  return load_task(c.task_path);
}

void emit(const Config& c, const json& j, const std::string& human) {
  if (json_mode(c)) std::cout << j.dump() << '\n';
  else std::cout << human;
}

std::shared_ptr<const PlanSpace> build(const Config& c, PlanningTask task, LengthBound bound) {
  const PlanSpaceOptions opts = space_options();
  if (!c.emit_cnf.empty()) {
    const Encoding e = encode(task, bound, {.with_indicators = true, .cap_factor = opts.cap_factor});
    std::ofstream out(c.emit_cnf);
    if (!out) throw UsageError("cannot write " + c.emit_cnf);
    write_dimacs(out, e.cnf);
    std::ofstream vars(c.emit_cnf + ".vars");
    if (!vars) throw UsageError("cannot write " + c.emit_cnf + ".vars");
    write_varmap(vars, e, task);
  }
  auto space = build_plan_space(std::move(task), bound, opts);
  if (!c.emit_nnf.empty()) {
    std::ofstream out(c.emit_nnf);
    if (!out) throw UsageError("cannot write " + c.emit_nnf);
    write_nnf(out, space->ddnnf());
  }
  return space;
}

std::string names_line(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? " " : "") + names[i];
  return s + "\n";
}

std::string plan_line(const Plan& p, const PlanningTask& t) {
  if (p.steps.empty()) return "(empty plan)\n";
  return names_line(t.operator_names(p.steps));
}

json with_bound(json j, LengthBound b) {
  j["ℓ"] = b.value;
  return j;
}

std::string facet_text(const Facet& f, const PlanningTask& t) {
  return (f.sign == FacetSign::Inclusive ? "+" : "-") + t.operator_at(f.op).name;
}

std::string human_snapshot(const Snapshot& s, const PlanningTask& t) {
  std::ostringstream os;
  os << "plans: " << s.count << '\n';
  os << "commitments:";
  if (s.commitments.empty()) os << " none";
  for (const auto& c : s.commitments) {
    os << ' ' << commitment_kind_name(c.kind) << ' ';
    if (c.kind == Commitment::Kind::Prefix) os << c.step << ' ';
    os << t.operator_at(c.op).name << ';';
  }
  os << '\n';
  if (s.facets.empty()) os << "facets: none (plan space fully determined)\n";
  for (const auto& r : s.facets)
    os << "facet " << facet_text(r.facet, t) << "  significance " << r.significance.str() << '\n';
  for (const auto& p : s.samples) os << "sample: " << plan_line(p, t);
  return os.str();
}

Commitment parse_commitment(std::istringstream& ls, const std::string& verb, const NavSession& nav) {
  const PlanningTask& t = nav.space().task();
  std::string a, b;
  ls >> a >> b;
  auto op = [&](const std::string& name) {
    auto id = t.find_operator(name);
    if (!id) throw UsageError("unknown operator '" + name + "'");
    return *id;
  };
  if (a.empty()) throw UsageError(verb + " needs an operator name");
  if (verb == "enforce") return Commitment::enforce(op(a));
  if (verb == "forbid") return Commitment::forbid(op(a));
  // prefix NAME fixes the next step; prefix I NAME names it explicitly.
  if (b.empty()) {
    std::size_t next = 0;
    for (const auto& c : nav.view().commitments()) next += c.kind == Commitment::Kind::Prefix;
    return Commitment::prefix(next, op(a));
  }
  if (a.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("prefix step must be a non-negative integer");
  return Commitment::prefix(std::stoull(a), op(b));
}

int navigate(const Config& c, std::shared_ptr<const PlanSpace> space) {
  if (space->count() == 0) throw NoPlans("no plans within the length bound");
  const PlanningTask& t = space->task();
  NavSession nav(space);
  auto show = [&] {
    if (json_mode(c)) std::cout << json{{"snapshot", snapshot_to_json(nav.snapshot(), t)}}.dump() << '\n';
    else std::cout << human_snapshot(nav.snapshot(), t);
  };
  auto fail = [&](const std::string& msg, const json& extra = nullptr) {
    if (json_mode(c)) {
      json j{{"error", msg}};
      if (!extra.is_null()) j["commitment"] = extra;
      std::cout << j.dump() << '\n';
    } else {
      std::cout << "error: " << msg << '\n';
    }
  };
  if (!json_mode(c)) std::cout << "commands: enforce OP | forbid OP | prefix [STEP] OP | undo | show | quit\n";
  show();
  std::string line;
  while (std::getline(std::cin, line)) {
    std::istringstream ls(line);
    std::string verb;
    if (!(ls >> verb) || verb[0] == '#') continue;
    try {
      if (verb == "quit" || verb == "exit") break;
      if (verb == "show") {
        show();
      } else if (verb == "undo") {
        if (nav.depth() == 0) {
          fail("nothing to undo");
          continue;
        }
        nav.undo();
        show();
      } else if (verb == "enforce" || verb == "forbid" || verb == "prefix") {
        nav.commit(parse_commitment(ls, verb, nav));
        show();
      } else {
        fail("unknown command '" + verb + "'");
      }
    } catch (const CommitmentError& e) {
      fail(e.what(), commitment_to_json(e.commitment(), t));
    } catch (const UsageError& e) {
      fail(e.what());
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count and reason over the bounded plans of a grounded STRIPS task."};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--task", cfg.task_path, "Task file (JSON)");
  app.add_option("--length", cfg.length, "Length bound");
  app.add_option("--factor", cfg.factor, "Multiplier over --base");
  app.add_option("--base", cfg.base, "Base length for --factor");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"human", "json"}));
  app.add_option("--emit-cnf", cfg.emit_cnf, "Write the DIMACS encoding (and a .vars map) here");
  app.add_option("--emit-nnf", cfg.emit_nnf, "Write the compiled d-DNNF here");

  auto* count = app.add_subcommand("count", "Number of plans");
  auto* exists = app.add_subcommand("exists", "Whether a plan exists");
  std::string topk_k;
  auto* topk = app.add_subcommand("topk", "Whether at least K plans exist");
  topk->add_option("K", topk_k)->required();
  auto* brave = app.add_subcommand("brave", "Operators in some plan");
  auto* cautious = app.add_subcommand("cautious", "Operators in every plan");
  auto* facets = app.add_subcommand("facets", "Inclusive and excluding facets");
  std::string sig_facet;
  auto* significance = app.add_subcommand("significance", "Significance of each facet (or of one: OP or !OP)");
  significance->add_option("FACET", sig_facet);
  std::string query_text;
  auto* prob = app.add_subcommand("prob", "Probability of a query");
  prob->add_option("QUERY", query_text)->required();
  std::size_t enum_limit = 1000;
  auto* enumerate_cmd = app.add_subcommand("enum", "Enumerate plans");
  enumerate_cmd->add_option("--limit", enum_limit, "Maximum number of plans");
  std::size_t sample_n = 0;
  std::uint64_t seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Sample plans uniformly");
  sample_cmd->add_option("N", sample_n)->required();
  sample_cmd->add_option("--seed", seed, "Random seed");
  std::optional<std::size_t> oracle_ms;
  auto* oracle = app.add_subcommand("oracle", "Count by explicit enumeration");
  oracle->add_option("--time-budget-ms", oracle_ms, "Stop after this many milliseconds");
  std::string nnf_in;
  auto* validate_cmd = app.add_subcommand("validate-ddnnf", "Check the compiled d-DNNF (or an NNF file)");
  validate_cmd->add_option("--nnf", nnf_in, "Validate this NNF file instead of compiling");
  auto* navigate_cmd = app.add_subcommand("navigate", "Interactive narrowing of the plan space");
  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", host, "Address to bind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*serve_cmd) {
      ServiceOptions so;
      so.space = space_options();
      Service svc(so);
      const bool ok = serve(svc, host, port, [&](int bound) {
        std::cerr << "listening on " << host << ':' << bound << std::endl;
      });
      if (!ok) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return kUsage;
      }
      return kOk;
    }

    if (*validate_cmd && !nnf_in.empty()) {
      std::ifstream in(nnf_in);
      if (!in) throw UsageError("cannot read " + nnf_in);
      const Ddnnf d = read_nnf(in);
      const ValidationReport r = validate(d);
      json v = json::array();
      std::string human;
      for (const auto& x : r.violations) {
        v.push_back({{"node", x.node}, {"message", x.message}});
        human += "violation at node " + std::to_string(x.node) + ": " + x.message + "\n";
      }
      emit(cfg, {{"ok", r.ok()}, {"nodes", d.num_nodes()}, {"edges", d.num_edges()}, {"violations", v}},
           human + (r.ok() ? "ok" : "invalid") + " (" + std::to_string(d.num_nodes()) + " nodes)\n");
      return kOk;
    }

    PlanningTask task = load(cfg);
    const LengthBound bound = resolve_bound(cfg);

    if (*oracle) {
      task.check_bound(bound);
      OracleStats st;
      bool first = true;
      const bool complete = for_each_plan(
          task, bound,
          [&](const Plan& p) {
            std::set<OpId> used(p.steps.begin(), p.steps.end());
            st.brave.insert(used.begin(), used.end());
            if (first) {
              st.cautious = used;
            } else {
              std::set<OpId> keep;
              std::set_intersection(st.cautious.begin(), st.cautious.end(), used.begin(), used.end(),
                                    std::inserter(keep, keep.end()));
              st.cautious = std::move(keep);
            }
            first = false;
            ++st.count;
            return true;
          },
          oracle_ms ? std::optional(std::chrono::milliseconds(*oracle_ms)) : std::nullopt);
      if (!complete) throw BudgetExceeded("enumeration stopped after " + std::to_string(*oracle_ms) +
                                          " ms with " + st.count.str() + " plans found");
      const auto b = task.operator_names({st.brave.begin(), st.brave.end()});
      const auto cc = task.operator_names({st.cautious.begin(), st.cautious.end()});
      emit(cfg,
           with_bound({{"count", st.count.str()}, {"brave", b}, {"cautious", cc}, {"no_plans", first}}, bound),
           "plans: " + st.count.str() + "\nbrave: " + names_line(b) + "cautious: " + names_line(cc));
      return kOk;
    }

    auto space = build(cfg, task, bound);
    const PlanningTask& t = space->task();
    PlanView view(space);

    if (*count) {
      emit(cfg, with_bound({{"count", view.count().str()}}, bound), view.count().str() + "\n");
    } else if (*exists) {
      emit(cfg, with_bound({{"exists", view.plan_exists()}}, bound), view.plan_exists() ? "yes\n" : "no\n");
    } else if (*topk) {
      if (topk_k.empty() || topk_k.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("K must be a non-negative integer");
      const bool r = view.top_k_exists(BigInt(topk_k));
      emit(cfg, with_bound({{"k", topk_k}, {"result", r}, {"count", view.count().str()}}, bound),
           r ? "yes\n" : "no\n");
    } else if (*brave) {
      const auto names = t.operator_names(view.brave());
      emit(cfg, with_bound({{"brave", names}}, bound), names_line(names));
    } else if (*cautious) {
      const auto names = t.operator_names(view.cautious());
      emit(cfg, with_bound({{"cautious", names}, {"no_plans", view.empty()}}, bound),
           view.empty() ? "(no plans)\n" : names_line(names));
    } else if (*facets) {
      json rows = json::array();
      std::string human;
      for (const Facet& f : view.facets().all()) {
        rows.push_back({{"op", t.operator_at(f.op).name},
                        {"sign", f.sign == FacetSign::Inclusive ? "inclusive" : "excluding"}});
        human += facet_text(f, t) + "\n";
      }
      emit(cfg, with_bound({{"facets", rows}, {"size", view.facets().size()}}, bound),
           human.empty() ? "(no facets)\n" : human);
    } else if (*significance) {
      if (view.empty()) throw NoPlans("no plans within the length bound");
      std::vector<Facet> which;
      if (!sig_facet.empty()) {
        const bool neg = sig_facet[0] == '!';
        const std::string name = neg ? sig_facet.substr(1) : sig_facet;
        auto id = t.find_operator(name);
        if (!id) throw UsageError("unknown operator '" + name + "'");
        which.push_back({*id, neg ? FacetSign::Excluding : FacetSign::Inclusive});
      } else {
        which = view.facets().all();
      }
      json rows = json::array();
      std::string human;
      for (const Facet& f : which) {
        const Probability p = view.significance(f);
        rows.push_back(facet_row_to_json({f, p}, t));
        human += facet_text(f, t) + " " + p.str() + "\n";
      }
      emit(cfg, with_bound({{"significance", rows}}, bound), human.empty() ? "(no facets)\n" : human);
    } else if (*prob) {
      const Query q = parse_query(query_text, t);
      const BigInt sat = view.query_count(q);
      const Probability p = Probability::of(sat, view.count());
      json j = probability_to_json(p);
      j["count"] = sat.str();
      j["total"] = view.count().str();
      emit(cfg, with_bound(j, bound), p.str() + "\n");
    } else if (*enumerate_cmd) {
      const PlanList pl = view.enumerate_plans(enum_limit);
      json plans = json::array();
      std::string human;
      for (const auto& p : pl.plans) {
        plans.push_back(plan_to_json(p, t));
        human += plan_line(p, t);
      }
      if (pl.truncated) human += "(truncated at " + std::to_string(enum_limit) + ")\n";
      emit(cfg, with_bound({{"plans", plans}, {"truncated", pl.truncated}, {"count", view.count().str()}}, bound),
           human);
    } else if (*sample_cmd) {
      if (view.empty()) throw NoPlans("no plans within the length bound");
      json plans = json::array();
      std::string human;
      for (const auto& p : view.sample_plans(sample_n, seed)) {
        plans.push_back(plan_to_json(p, t));
        human += plan_line(p, t);
      }
      emit(cfg, with_bound({{"plans", plans}, {"seed", seed}}, bound), human);
    } else if (*validate_cmd) {
      const Ddnnf& d = space->ddnnf();
      const ValidationReport r = validate(d);
      json v = json::array();
      std::string human;
      for (const auto& x : r.violations) {
        v.push_back({{"node", x.node}, {"message", x.message}});
        human += "violation at node " + std::to_string(x.node) + ": " + x.message + "\n";
      }
      emit(cfg,
           with_bound({{"ok", r.ok()}, {"nodes", d.num_nodes()}, {"edges", d.num_edges()},
                       {"vars", d.num_vars()}, {"violations", v}},
                      bound),
           human + (r.ok() ? "ok" : "invalid") + " (" + std::to_string(d.num_nodes()) + " nodes, " +
               std::to_string(d.num_edges()) + " edges)\n");
    } else if (*navigate_cmd) {
      return navigate(cfg, space);
    }
    return kOk;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const NoPlans& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoPlans;
  } catch (const NoModelsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoPlans;
  } catch (const UndefinedSignificance& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoPlans;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
