#include "expect.hpp"
#include "fixtures.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include "flower/filter.hpp"

#include <gtest/gtest.h>

using namespace flower;
using namespace flower::testing;
using nlohmann::json;

namespace {

EvidenceItem item(const char* id, DataSourceCategory cat, const char* desc, const char* at) {
  EvidenceItem e;
  e.id = EvidenceId(id);
  e.category = cat;
  e.description = desc;
  e.acquired_at = ts(at);
  e.acquired_by = "analyst1";
  return e;
}

std::vector<std::string> ids(const std::vector<EvidenceId>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.str());
  return out;
}

json items_json(const Case& c) {
  json out = json::array();
  for (const auto& [_, e] : c.evidence) out.push_back(to_json(e));
  return out;
}

}  // namespace

TEST(Filter, CategoryAndKeyword) {
  Case c;
  const auto e1 = item("01HQ000000000000000000000A", DataSourceCategory::Host, "sshd log", "2024-01-02T00:00:00Z");
  const auto e2 = item("01HQ000000000000000000000B", DataSourceCategory::Network, "dns", "2024-01-02T00:00:00Z");
  c.evidence.emplace(e1.id, e1);
  c.evidence.emplace(e2.id, e2);
  const auto spec = FilterSpec::all_of({FilterSpec::category(DataSourceCategory::Host), FilterSpec::keyword("ssh")});
  EXPECT_EQ(apply_filter(c, spec), std::vector<EvidenceId>{e1.id});
  EXPECT_EQ(apply_filter(c, FilterSpec::keyword("SSHD")), std::vector<EvidenceId>{e1.id});
  EXPECT_EQ(apply_filter(c, FilterSpec::keyword("ANALYST")).size(), 2u);
}

TEST(Filter, ComplementOfCoveringRangeIsEmpty) {
  Case c;
  const auto e1 = item("01HQ000000000000000000000A", DataSourceCategory::Host, "a", "2024-01-01T00:00:00Z");
  const auto e2 = item("01HQ000000000000000000000B", DataSourceCategory::Host, "b", "2024-01-09T00:00:00Z");
  c.evidence.emplace(e1.id, e1);
  c.evidence.emplace(e2.id, e2);
  const auto range = FilterSpec::time_range(ts("2024-01-01T00:00:00Z"), ts("2024-01-09T00:00:00Z"));
  EXPECT_EQ(apply_filter(c, range).size(), 2u);
  EXPECT_TRUE(apply_filter(c, FilterSpec::negate(range)).empty());
}

TEST(Filter, EmptyConnectives) {
  Case c;
  const auto e1 = item("01HQ000000000000000000000A", DataSourceCategory::Host, "a", "2024-01-01T00:00:00Z");
  c.evidence.emplace(e1.id, e1);
  EXPECT_EQ(apply_filter(c, FilterSpec::all_of({})).size(), 1u);
  EXPECT_TRUE(apply_filter(c, FilterSpec::any_of({})).empty());
}

TEST(Filter, WireFormRoundTrip) {
  const json j = json::parse(R"({"and":[{"category":"network"},{"not":{"keyword":"dns"}},
    {"or":[{"time_range":{"from":"2024-01-01T00:00:00Z","to":"2024-01-02T00:00:00Z"}},
           {"target":"01HQ000000000000000000000C"}]}]})");
  EXPECT_EQ(FilterSpec::from_json(j).to_json(), j);
}

TEST(Filter, MalformedTrees) {
  for (const char* bad : {R"({})", R"({"category":"cloud"})", R"({"and":{"category":"host"}})",
                          R"({"keyword":1})", R"({"time_range":{"from":"x","to":"2024-01-01T00:00:00Z"}})",
                          R"({"category":"host","keyword":"x"})", R"({"target":"short"})", R"([])",
                          R"({"xor":[]})"}) {
    expect_error(ErrorKind::ValidationError, [&] { FilterSpec::from_json(json::parse(bad)); });
  }
}

TEST(Filter, MatchesOracleOnRandomVaults) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const Case c = random_vault(rng, 20);
    std::vector<std::string> targets;
    for (const auto& [t, _] : c.targets) targets.push_back(t.str());
    const json f = random_filter(rng, targets, 3);
    EXPECT_EQ(ids(apply_filter(c, FilterSpec::from_json(f))), oracle_filter(f, items_json(c))) << f.dump();
  }
}

TEST(Filter, SessionJournalsFilterRuns) {
  auto c = build_scripted_case();
  const auto before = c.s().journal().events().size();
  const auto result = c.s().run_filter(FilterSpec::keyword("proxy"), c.q_exfil, "a");
  EXPECT_EQ(result, std::vector<EvidenceId>{c.ev_proxy});
  EXPECT_EQ(c.s().journal().events().size(), before + 1);
  ASSERT_EQ(c.s().state().filters.size(), 1u);
  EXPECT_EQ(c.s().state().filters[0].result, result);
  EXPECT_EQ(replay(c.s().journal().events()), c.s().state());
}
