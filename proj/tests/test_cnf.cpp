#include "planspace/cnf.hpp"
#include "planspace/encoder.hpp"
#include "support/fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace planspace;

namespace {

// Truth-table count, independent of the library's splitting counter.
BigInt truth_table(const Cnf& f) {
  REQUIRE(f.num_vars() <= 20);
  BigInt n = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << f.num_vars()); ++m) {
    bool ok = true;
    for (const auto& c : f.clauses()) {
      bool sat = false;
      for (Lit l : c)
        if (((m >> (l.var() - 1)) & 1) == static_cast<std::uint64_t>(l.positive())) sat = true;
      if (!sat) {
        ok = false;
        break;
      }
    }
    n += ok;
  }
  return n;
}

Cnf random_cnf(std::mt19937_64& rng, std::size_t max_vars = 12) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_vars)(rng);
  const std::size_t m = std::uniform_int_distribution<std::size_t>(0, 3 * n)(rng);
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

}  // namespace

TEST_CASE("clause canonicalization", "[cnf]") {
  Clause c{3, -1, 3};
  REQUIRE(c.size() == 2);
  CHECK(c.lits()[0] == Lit(1, false));
  CHECK(c.lits()[1] == Lit(3, true));
  CHECK_THROWS_AS((Clause{1, -1}), ContractError);
  CHECK_THROWS_AS((Clause{0}), ContractError);
  Cnf f(2);
  CHECK_THROWS_AS(f.add(Clause{3}), ContractError);
}

TEST_CASE("DIMACS output and parsing", "[cnf]") {
  Cnf f(2, {Clause{1, -2}});
  CHECK(to_dimacs(f) == "p cnf 2 1\n1 -2 0\n");
  CHECK(parse_dimacs("c comment\np cnf 3 2\n1 2 0\n-3\n 0\n") ==
        Cnf(3, {Clause{1, 2}, Clause{-3}}));

  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_dimacs(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("p cnf 1 1\n2 0\n") == 2);
  CHECK(line_of("p dnf 1 1\n1 0\n") == 1);
  CHECK(line_of("1 0\n") == 1);
  CHECK(line_of("p cnf 2 2\n1 0\n") != 0);
  CHECK(line_of("p cnf 2 1\n1 -1 0\n") == 2);
  CHECK(line_of("p cnf 2 1\n1 x 0\n") == 2);
}

TEST_CASE("DIMACS round trip of an encoding", "[cnf]") {
  const auto t = testsupport::pi1();
  const Cnf f = encode(t, {4}).cnf;
  const Cnf g = parse_dimacs(to_dimacs(f));
  CHECK(g == f);
  CHECK(g.canonical() == f.canonical());
}

TEST_CASE("unit propagation", "[cnf]") {
  auto r = unit_propagate(Cnf(2, {Clause{1}, Clause{-1, 2}}));
  CHECK(r.status == PropagationStatus::Ok);
  CHECK(r.implied == std::vector<Lit>{Lit(1, true), Lit(2, true)});
  CHECK(r.residual.num_clauses() == 0);

  CHECK(unit_propagate(Cnf(1, {Clause{1}, Clause{-1}})).status == PropagationStatus::Conflict);
  CHECK(unit_propagate(Cnf(1, {Clause{1}}), {Lit(1, false)}).status == PropagationStatus::Conflict);

  auto partial = unit_propagate(Cnf(3, {Clause{1, 2, 3}, Clause{-1, 2}}), {Lit(1, true)});
  CHECK(partial.implied == std::vector<Lit>{Lit(1, true), Lit(2, true)});
  CHECK(partial.residual.num_clauses() == 0);

  auto residual = unit_propagate(Cnf(3, {Clause{1, 2, 3}}), {Lit(1, false)});
  REQUIRE(residual.residual.num_clauses() == 1);
  CHECK(residual.residual.clauses()[0] == Clause{2, 3});

  const auto t = testsupport::pi1();
  const Encoding enc = encode(t, {4});
  const OpId sleep = t.op("sleep");
  // Each timed placement of sleep is refuted by unit resolution alone.
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(unit_propagate(enc.cnf, {Lit(enc.varmap.op_at(sleep, i), true)}).status ==
          PropagationStatus::Conflict);
  // The indicator only implies a disjunction over steps, which unit
  // resolution cannot split; the residual formula is still unsatisfiable.
  auto ind = unit_propagate(enc.cnf, {Lit(enc.varmap.op_ind(sleep), true)});
  CHECK(ind.status == PropagationStatus::Ok);
  CHECK(brute_force_count(ind.residual, {.max_vars = 64}) == 0);
}

TEST_CASE("unit propagation is monotone", "[cnf]") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    Cnf f = random_cnf(rng);
    std::vector<Lit> a;
    auto base = unit_propagate(f, a);
    for (int step = 0; step < 3 && base.status == PropagationStatus::Ok; ++step) {
      Var v = static_cast<Var>(1 + rng() % f.num_vars());
      bool taken = false;
      for (Lit l : a) taken |= l.var() == v;
      if (taken) continue;
      a.emplace_back(v, rng() & 1);
      auto more = unit_propagate(f, a);
      if (more.status == PropagationStatus::Conflict) break;
      CHECK(std::includes(more.implied.begin(), more.implied.end(), base.implied.begin(),
                          base.implied.end()));
      base = std::move(more);
    }
  }
}

TEST_CASE("brute force counter", "[cnf]") {
  CHECK(brute_force_count(Cnf(3)) == 8);
  CHECK(brute_force_count(Cnf(2, {Clause{1, 2}})) == 3);
  CHECK(brute_force_count(Cnf(1, {Clause{1}, Clause{-1}})) == 0);
  CHECK_THROWS_AS(brute_force_count(Cnf(31)), ConfigError);

  const auto t = testsupport::pi1();
  CHECK(brute_force_count(encode(t, {3}).cnf, {.max_vars = 64}) == 1);
}

TEST_CASE("brute force counter against a truth table, with Shannon expansion", "[cnf]") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    Cnf f = random_cnf(rng);
    const BigInt n = brute_force_count(f);
    CHECK(n == truth_table(f));
    Var v = static_cast<Var>(1 + rng() % f.num_vars());
    Cnf pos = f, neg = f;
    pos.add(Clause({Lit(v, true)}));
    neg.add(Clause({Lit(v, false)}));
    CHECK(brute_force_count(pos) + brute_force_count(neg) == n);
  }
}
