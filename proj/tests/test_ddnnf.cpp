#include "planspace/cnf.hpp"
#include "planspace/compiler.hpp"
#include "planspace/ddnnf.hpp"
#include "planspace/encoder.hpp"
#include "planspace/nnf_io.hpp"
#include "support/fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

using namespace planspace;
using testsupport::plan_of;

namespace {

Cnf random_cnf(std::mt19937_64& rng, std::size_t max_vars = 16) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_vars)(rng);
  const std::size_t m = std::uniform_int_distribution<std::size_t>(0, 4 * n)(rng);
  Cnf f(n);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    std::vector<Lit> lits;
    for (std::size_t j = 0; j < k; ++j) {
      Var v = static_cast<Var>(std::uniform_int_distribution<std::size_t>(1, n)(rng));
      bool dup = false;
      for (Lit l : lits) dup |= l.var() == v;
      if (!dup) lits.emplace_back(v, rng() & 1);
    }
    f.add(Clause(std::move(lits)));
  }
  return f;
}

std::vector<Model> all_models(const Cnf& f) {
  std::vector<Model> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << f.num_vars()); ++m) {
    Model x(f.num_vars());
    for (Var v = 1; v <= f.num_vars(); ++v) x.set(Lit(v, (m >> (v - 1)) & 1));
    if (x.satisfies(f)) out.push_back(std::move(x));
  }
  return out;
}

Cnf with_units(Cnf f, const std::vector<Lit>& lits) {
  for (Lit l : lits) f.add(Clause({l}));
  return f;
}

}  // namespace

TEST_CASE("compiler corner cases", "[ddnnf]") {
  Ddnnf unsat = compile(Cnf(1, {Clause{1}, Clause{-1}}));
  CHECK(unsat.node(unsat.root()).kind == NodeKind::False);
  CHECK(count(unsat) == 0);

  Ddnnf empty = compile(Cnf(4));
  CHECK(empty.node(empty.root()).kind == NodeKind::True);
  CHECK(count(empty) == 16);

  CHECK(count(compile(Cnf(2, {Clause{1, 2}}))) == 3);
  CHECK(count(compile(Cnf(0))) == 1);
}

TEST_CASE("counting with an explicit variable set", "[ddnnf]") {
  Ddnnf t(3);
  t.set_root(t.add_true());
  CHECK(count(t, VarSet::all(3)) == 8);
  Ddnnf d = compile(Cnf(2, {Clause{1, 2}}));
  CHECK(count(d, VarSet::all(2)) == 3);

  Ddnnf lit(3);
  lit.set_root(lit.add_literal(Lit(2, true)));
  VarSet small(3);
  small.insert(1);
  CHECK_THROWS_AS(count(lit, small), ContractError);
  small.insert(2);
  CHECK(count(lit, small) == 2);
}

TEST_CASE("compiled plan space of the morning task", "[ddnnf]") {
  const auto t = testsupport::pi1();
  const Encoding e = encode(t, {4});
  const Ddnnf d = compile(e.cnf);
  CHECK(validate(d).ok());
  CHECK(count(d) == 2);
  CHECK(count(d) == brute_force_count(e.cnf, {.max_vars = 64}));

  const auto& vm = e.varmap;
  CHECK(conditioned_count(d, {Lit(vm.op_ind(t.op("get-ready")), true)}) == 1);
  CHECK(conditioned_count(d, {Lit(vm.op_ind(t.op("sleep")), true)}) == 0);
  CHECK(conditioned_count(d, {}) == count(d));
  CHECK_THROWS_AS(conditioned_count(d, {Lit(1, true), Lit(1, false)}), ContractError);
  CHECK(count_or_zero(d, {Lit(1, true), Lit(1, false)}) == 0);

  std::vector<Var> inds;
  for (OpId o = 0; o < t.num_operators(); ++o) inds.push_back(vm.op_ind(o));
  const Backbone b = backbone(d, inds);
  CHECK(b.core == std::vector<Var>{vm.op_ind(t.op("wake-up")), vm.op_ind(t.op("go-to-AAAI")),
                                   vm.op_ind(t.op("give-talk"))});
  CHECK(b.dead == std::vector<Var>{vm.op_ind(t.op("sleep"))});

  const Enumeration en = enumerate(d, 10);
  CHECK_FALSE(en.truncated);
  REQUIRE(en.models.size() == 2);
  std::set<Plan> plans;
  for (const auto& m : en.models) {
    CHECK(m.satisfies(e.cnf));
    plans.insert(decode_model(e, m));
  }
  CHECK(plans == std::set<Plan>{plan_of(t, {"wake-up", "get-ready", "go-to-AAAI", "give-talk"}),
                                plan_of(t, {"wake-up", "go-to-AAAI", "give-talk"})});

  // nnf round trip
  const Ddnnf back = parse_nnf(to_nnf(d));
  CHECK(count(back) == 2);
  CHECK(validate(back).ok());
}

TEST_CASE("validator negative controls", "[ddnnf]") {
  Ddnnf overlap(2);
  NodeId a = overlap.add_literal(Lit(1, true));
  NodeId b = overlap.add_literal(Lit(1, false));
  overlap.set_root(overlap.add_and({a, b}));
  auto r = validate(overlap);
  CHECK(r.count(Violation::Kind::Decomposability) == 1);
  CHECK(r.violations[0].node == 2);

  Ddnnf dec(2);
  NodeId hi = dec.add_literal(Lit(1, true));
  NodeId lo = dec.add_literal(Lit(2, true));
  dec.set_root(dec.add_decision(1, hi, lo));
  CHECK(validate(dec).count(Violation::Kind::Decision) == 1);

  Ddnnf fine(2);
  fine.set_root(fine.add_decision(1, fine.add_literal(Lit(2, true)), fine.add_true()));
  CHECK(validate(fine).ok());
  CHECK(count(fine) == 3);
}

TEST_CASE("backbone corner cases", "[ddnnf]") {
  Ddnnf t(2);
  t.set_root(t.add_true());
  auto b = backbone(t, {1, 2});
  CHECK(b.core.empty());
  CHECK(b.dead.empty());
  Ddnnf one = compile(Cnf(2, {Clause{1}}));
  CHECK(backbone(one, {1, 2}).core == std::vector<Var>{1});
  CHECK_THROWS_AS(backbone(compile(Cnf(1, {Clause{1}, Clause{-1}})), {1}), NoModelsError);
}

TEST_CASE("sampling", "[ddnnf]") {
  Ddnnf one = compile(Cnf(3, {Clause{1}, Clause{-2}, Clause{3}}));
  for (const auto& m : sample(one, 20, 3)) CHECK(m == Model::from_lits(3, {Lit(1, true), Lit(3, true)}));

  CHECK_THROWS_AS(sample(compile(Cnf(1, {Clause{1}, Clause{-1}})), 1, 0), NoModelsError);

  Ddnnf d = compile(Cnf(2, {Clause{1, 2}}));
  CHECK(sample(d, 50, 9) == sample(d, 50, 9));
  CHECK(sample(d, 50, 9) != sample(d, 50, 10));

  std::map<std::vector<bool>, int> freq;
  const int n = 30000;
  for (const auto& m : sample(d, n, 1)) {
    REQUIRE(m.satisfies(Clause{1, 2}));
    ++freq[{m[1], m[2]}];
  }
  REQUIRE(freq.size() == 3);
  for (const auto& [k, c] : freq) CHECK(std::abs(c / double(n) - 1.0 / 3) < 0.01);

  const auto t = testsupport::pi1();
  const Encoding e = encode(t, {4});
  const Ddnnf pd = compile(e.cnf);
  int with_ready = 0;
  for (const auto& m : sample(pd, 10000, 42)) {
    const Plan p = decode_model(e, m);
    REQUIRE(validate_plan(t, p, {4}));
    with_ready += p.size() == 4;
  }
  CHECK(std::abs(with_ready / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("enumeration corner cases", "[ddnnf]") {
  Ddnnf f(1);
  f.set_root(f.add_false());
  CHECK(enumerate(f, 10).models.empty());
  Ddnnf three = compile(Cnf(2, {Clause{1, 2}}));
  auto one = enumerate(three, 1);
  CHECK(one.models.size() == 1);
  CHECK(one.truncated);
  auto all = enumerate(three, 3);
  CHECK(all.models.size() == 3);
  CHECK_FALSE(all.truncated);
  CHECK(enumerate(three, 3).models == enumerate(three, 3).models);

  // More free variables than fit in a machine word.
  Ddnnf wide = compile(Cnf(70, {Clause{1}}));
  auto some = enumerate(wide, 5);
  CHECK(some.models.size() == 5);
  CHECK(some.truncated);
  std::set<Model> distinct(some.models.begin(), some.models.end());
  CHECK(distinct.size() == 5);
}

TEST_CASE("compiler against truth tables on random CNFs", "[ddnnf]") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 200; ++k) {
    const Cnf f = random_cnf(rng);
    const Ddnnf d = compile(f);
    INFO("instance " << k << "\n" << to_dimacs(f));
    REQUIRE(validate(d).ok());
    const auto models = all_models(f);
    REQUIRE(count(d) == models.size());
    CHECK(count(compile(f, {.use_cache = false, .var_rank = {}})) == models.size());

    // Enumeration yields exactly the models.
    const auto en = enumerate(d, models.size() + 1);
    CHECK(std::set<Model>(en.models.begin(), en.models.end()) ==
          std::set<Model>(models.begin(), models.end()));
    CHECK(en.models.size() == models.size());

    // Conditioning matches brute force under random assumption sets.
    for (int j = 0; j < 100; ++j) {
      std::vector<Lit> a;
      for (Var v = 1; v <= f.num_vars(); ++v)
        if (rng() % 4 == 0) a.emplace_back(v, rng() & 1);
      CHECK(conditioned_count(d, a) == brute_force_count(with_units(f, a)));
    }

    // Shannon identity on every variable.
    for (Var v = 1; v <= f.num_vars(); ++v)
      CHECK(conditioned_count(d, {Lit(v, true)}) + conditioned_count(d, {Lit(v, false)}) == count(d));

    // NNF round trip.
    CHECK(count(parse_nnf(to_nnf(d))) == count(d));
  }
}

TEST_CASE("branching ranks keep the model count", "[ddnnf]") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 100; ++round) {
    const Cnf f = random_cnf(rng);
    CompileOptions o;
    o.var_rank.resize(f.num_vars() + 1);
    for (auto& r : o.var_rank) r = static_cast<std::uint32_t>(rng() % 4);
    const Ddnnf d = compile(f, o);
    INFO(to_dimacs(f));
    CHECK(validate(d).ok());
    CHECK(count(d) == all_models(f).size());
  }
  // The plan encoding, branched step by step.
  const auto t = testsupport::pi1();
  const Encoding e = encode(t, {6});
  CompileOptions o;
  o.var_rank = e.varmap.time_ranks();
  CHECK(count(compile(e.cnf, o)) == count(compile(e.cnf)));
  CHECK(e.varmap.time_ranks()[e.varmap.op_at(0, 2)] == 5);
  CHECK(e.varmap.time_ranks()[e.varmap.atom_at(0, 3)] == 6);
  CHECK(e.varmap.time_ranks()[e.varmap.op_ind(0)] == 14);
}

TEST_CASE("nnf text format", "[ddnnf]") {
  Ddnnf lit(1);
  lit.set_root(lit.add_literal(Lit(1, true)));
  CHECK(to_nnf(lit) == "nnf 1 0 1\nL 1\n");

  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_nnf(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("nnf 2 1 1\nL 1\nA 1 5\n") == 3);
  CHECK(line_of("nnf 1 0 1\nL 2\n") == 2);
  CHECK(line_of("nnf 1 0 1\nX 1\n") == 2);
  CHECK(line_of("nnf x\n") == 1);
  CHECK(line_of("nnf 3 0 1\nL 1\n") != 0);
  CHECK(line_of("nnf 3 2 2\nL 1\nL -1\nA 2 0 1\n") == 0);  // parses; validation is separate
  const Ddnnf bad = parse_nnf("nnf 3 2 2\nL 1\nL -1\nA 2 0 1\n");
  CHECK_FALSE(validate(bad).ok());

  const Ddnnf dec = parse_nnf("nnf 4 2 2\nL 2\nA 0\nO 0 0\nO 1 2 0 1\n");
  CHECK(count(dec) == 3);
}

TEST_CASE("compile budget", "[ddnnf]") {
  const auto t = testsupport::pi1();
  CHECK_THROWS_AS(compile(encode(t, {8}).cnf, {.max_nodes = 5, .var_rank = {}}), BudgetExceeded);
}
