#include "planspace/session.hpp"
#include "support/fixtures.hpp"

#include <catch_amalgamated.hpp>

using namespace planspace;

namespace {

std::shared_ptr<const PlanSpace> pi1_space(std::size_t l) {
  return build_plan_space(testsupport::pi1(), {l});
}

}  // namespace

TEST_CASE("navigation session on the morning task", "[session]") {
  auto space = pi1_space(4);
  const auto& t = space->task();
  const OpId gr = t.op("get-ready");
  NavSession s(space);
  CHECK(s.depth() == 0);
  CHECK(s.snapshot().count == 2);
  REQUIRE(s.snapshot().facets.size() == 2);
  CHECK(s.snapshot().facets[0].facet == Facet{gr, FacetSign::Inclusive});
  CHECK(s.snapshot().facets[0].significance == Probability{1, 1});
  CHECK(s.snapshot().samples.size() == 3);
  for (const auto& p : s.snapshot().samples) CHECK(validate_plan(t, p, {4}));
  const json root = snapshot_to_json(s.snapshot(), t);

  s.commit(Commitment::enforce(gr));
  CHECK(s.snapshot().count == 1);
  CHECK(s.snapshot().facets.empty());
  CHECK(s.depth() == 1);
  CHECK(s.snapshot().commitments == std::vector<Commitment>{Commitment::enforce(gr)});

  s.undo();
  CHECK(s.snapshot().count == 2);
  CHECK(snapshot_to_json(s.snapshot(), t) == root);
  CHECK_THROWS_AS(s.undo(), ContractError);

  try {
    s.commit(Commitment::prefix(0, t.op("sleep")));
    FAIL("expected rejection");
  } catch (const CommitmentError& e) {
    CHECK(std::string(e.what()) == "would eliminate all plans");
    CHECK(e.commitment() == Commitment::prefix(0, t.op("sleep")));
  }
  CHECK(s.depth() == 0);
  CHECK_THROWS_AS(s.commit(Commitment::enforce(t.op("sleep"))), CommitmentError);
}

TEST_CASE("session counts never increase and undo restores", "[session]") {
  auto space = pi1_space(6);
  const auto& t = space->task();
  NavSession s(space, {.sample_count = 2, .seed = 5});
  std::vector<json> history{snapshot_to_json(s.snapshot(), t)};
  BigInt last = s.snapshot().count;
  for (const char* name : {"wake-up", "go-to-AAAI"}) {
    s.commit(Commitment::enforce(t.op(name)));
    CHECK(s.snapshot().count <= last);
    last = s.snapshot().count;
    history.push_back(snapshot_to_json(s.snapshot(), t));
  }
  while (s.depth() > 0) {
    history.pop_back();
    s.undo();
    CHECK(snapshot_to_json(s.snapshot(), t) == history.back());
  }
}

TEST_CASE("snapshot JSON", "[session]") {
  auto space = pi1_space(4);
  const auto& t = space->task();
  NavSession s(space);
  const json j = snapshot_to_json(s.snapshot(), t);
  CHECK(j["count"] == "2");
  CHECK(j["commitments"] == json::array());
  CHECK(j["facets"][0] == json{{"op", "get-ready"}, {"sign", "inclusive"},
                               {"significance", {{"num", "1"}, {"den", "1"}}}});
  CHECK(j["facets"][1]["sign"] == "excluding");
  CHECK(j["samples"].size() == 3);

  s.commit(Commitment::prefix(0, t.op("wake-up")));
  const json k = snapshot_to_json(s.snapshot(), t);
  CHECK(k["commitments"][0] == json{{"kind", "prefix"}, {"op", "wake-up"}, {"step", 0}});

  CHECK(commitment_from_json(json{{"kind", "forbid"}, {"op", "sleep"}}, t) ==
        Commitment::forbid(t.op("sleep")));
  CHECK(commitment_from_json(json{{"kind", "prefix"}, {"op", "sleep"}, {"step", 2}}, t) ==
        Commitment::prefix(2, t.op("sleep")));
  for (const json& bad : {json{{"kind", "enforce"}}, json{{"kind", "x"}, {"op", "sleep"}},
                          json{{"kind", "enforce"}, {"op", "nope"}},
                          json{{"kind", "prefix"}, {"op", "sleep"}},
                          json{{"kind", "prefix"}, {"op", "sleep"}, {"step", -1}}, json(3)})
    CHECK_THROWS_AS(commitment_from_json(bad, t), MalformedRequest);
}
