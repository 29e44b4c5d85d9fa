#include "expect.hpp"
#include "fixtures.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include "flower/report.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace flower;
using namespace flower::testing;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

Case fresh_case() {
  auto blobs = std::make_shared<MemoryBlobStore>();
  return Session::create(Journal(), blobs, "op \"quoted\"", ts("2024-01-01T00:00:00Z"), "a", fixed_options()).state();
}

}  // namespace

TEST(Dot, EmptyCaseHasOnlyTheAttacker) {
  const DotGraph g = parse_dot(export_dot(fresh_case()));
  EXPECT_TRUE(g.directed);
  EXPECT_EQ(g.name, "op \\\"quoted\\\"");
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_EQ(g.nodes.begin()->first, "attacker");
  EXPECT_EQ(g.nodes.begin()->second.at("shape"), "doubleoctagon");
  EXPECT_TRUE(g.edges.empty());
  EXPECT_TRUE(g.subgraphs.empty());
}

TEST(Dot, ClustersLeavesAndEdgesArePreserved) {
  auto c = build_scripted_case();
  const Case& s = c.s().state();
  const DotGraph g = parse_dot(export_dot(s));
  EXPECT_EQ(g.graph_attrs.at("compound"), "true");
  EXPECT_EQ(g.subgraphs.size(), s.targets.size());
  EXPECT_EQ(g.edges.size(), s.edges.size());
  EXPECT_EQ(g.nodes.size(), 1 + s.targets.size() + s.leaf_count());
  for (const auto& [tid, t] : s.targets) {
    const auto& members = g.subgraphs.at("cluster_" + tid.str());
    EXPECT_EQ(members.size(), 1 + t.leaves.size());
    for (const auto& l : t.leaves) {
      EXPECT_NE(std::find(members.begin(), members.end(), l.id.str()), members.end());
      EXPECT_EQ(g.nodes.at(l.id.str()).at("shape"), "ellipse");
    }
  }
  for (const auto& e : g.edges) {
    const auto& edge = s.edges.at(EdgeId(e.attrs.at("id")));
    EXPECT_EQ(e.from, edge.source ? edge.source->str() : "attacker");
    EXPECT_EQ(e.to, edge.dest.str());
    EXPECT_EQ(e.attrs.at("label"), edge.at.to_string());
  }
}

TEST(Dot, Deterministic) {
  auto a = build_scripted_case();
  auto b = build_scripted_case();
  EXPECT_EQ(export_dot(a.s().state()), export_dot(a.s().state()));
  EXPECT_EQ(export_dot(a.s().state()), export_dot(b.s().state()));
}

TEST(Dot, ParserRejectsBrokenInput) {
  for (const char* bad : {"digraph {", "digraph { a -- b }", "graph { a -> b }", "digraph { a -> }",
                          "digraph { a [label=\"x] }", "strict { }", "digraph { a } trailing", "digraph { a [x] }"}) {
    EXPECT_THROW(parse_dot(bad), std::runtime_error) << bad;
  }
  EXPECT_NO_THROW(parse_dot("/* c */ strict digraph g { // c\n a:p -> {b c} [w=1]; subgraph s { d } }"));
}

TEST(CaseJson, ExportImportRoundTrip) {
  auto c = build_scripted_case();
  const Case& s = c.s().state();
  const std::string text = export_case_json(s);
  EXPECT_EQ(text.back(), '\n');
  const Case back = import_case_json(text);
  EXPECT_EQ(back, s);
  EXPECT_EQ(state_digest(back), state_digest(s));
  EXPECT_EQ(export_case_json(back), text);
}

TEST(CaseJson, SchemaRequired) {
  auto j = case_to_json(fresh_case());
  j.erase("schema");
  expect_error(ErrorKind::UnsupportedSchema, [&] { import_case_json(j.dump()); });
  j["schema"] = "flowercase/9";
  expect_error(ErrorKind::UnsupportedSchema, [&] { import_case_json(j.dump()); });
  expect_error(ErrorKind::ValidationError, [&] { import_case_json("{"); });
}

TEST(CaseJson, MinimalHandBuiltFile) {
  const std::string text = R"({"schema":"flowercase/1","id":"01HQ000000000000000000000A","name":"mini",
    "opened_at":"2024-01-01T00:00:00Z",
    "targets":[{"id":"01HQ000000000000000000000B","label":"web-01","first_seen":"2024-01-01T00:00:00Z"}]})";
  const Case c = import_case_json(text);
  EXPECT_EQ(c.targets.size(), 1u);
  EXPECT_EQ(c.targets.begin()->second.label, "web-01");
}

TEST(Report, FreshCaseHasEmptySectionsAndBlockers) {
  auto blobs = std::make_shared<MemoryBlobStore>();
  Session s = Session::create(Journal(), blobs, "op", ts("2024-01-01T00:00:00Z"), "a", fixed_options());
  const auto t = s.add_target("web-01", ts("2024-01-02T00:00:00Z"), "a").id;
  const std::string r = generate_report(s.state(), ts("2024-02-01T00:00:00Z"));
  for (const char* h : {"## 1. Case summary", "## 2. Attack graph", "## 3. Questions", "## 4. Collection steps",
                        "## 5. Filters applied", "## 6. Hypotheses and verification", "## 7. Evidence inventory",
                        "## 8. Iteration history", "## 9. Closure status"}) {
    EXPECT_EQ(count(r, std::string("\n") + h + "\n"), 1u) << h;
  }
  EXPECT_NE(r.find("No compromise or move edges recorded."), std::string::npos);
  EXPECT_NE(r.find("No questions posed."), std::string::npos);
  EXPECT_NE(r.find("closed_allowed: false"), std::string::npos);
  EXPECT_NE(r.find("- Targets with unresolved origin: `" + t.str() + "`"), std::string::npos);
  EXPECT_NE(r.find("- Status: DRAFT"), std::string::npos);
  EXPECT_NE(r.find("- Generated: 2024-02-01T00:00:00Z"), std::string::npos);
}

TEST(Report, ScriptedCaseCrossReferences) {
  auto c = build_scripted_case();
  c.s().run_filter(FilterSpec::category(DataSourceCategory::Network), c.q_move, "a");
  c.s().close_case("a", ts("2024-01-10T00:00:00Z"));
  const std::string r = generate_report(c.s().state(), ts("2024-02-01T00:00:00Z"));
  EXPECT_EQ(report_xref(r, events_json(c.s().journal())), std::vector<std::string>{});
  EXPECT_NE(r.find("- Status: FINAL"), std::string::npos);
  EXPECT_NE(r.find("closed_allowed: true"), std::string::npos);
  EXPECT_EQ(r, generate_report(c.s().state(), ts("2024-02-01T00:00:00Z")));
  EXPECT_NE(r, generate_report(c.s().state(), ts("2024-02-02T00:00:00Z")));
}

TEST(Report, CellsCannotBreakTables) {
  auto c = build_scripted_case(false);
  c.s().pose_question(c.web, "pipe | and\nnewline", "a");
  const std::string r = generate_report(c.s().state(), ts("2024-02-01T00:00:00Z"));
  EXPECT_NE(r.find("pipe \\| and newline"), std::string::npos);
  EXPECT_EQ(report_xref(r, events_json(c.s().journal())), std::vector<std::string>{});
}

TEST(Report, XrefCatchesOmissionsAndOrphans) {
  auto c = build_scripted_case();
  const std::string r = generate_report(c.s().state(), ts("2024-02-01T00:00:00Z"));
  const auto events = events_json(c.s().journal());
  std::string missing = r;
  const auto pos = missing.find("\n| `" + c.ev_proxy.str() + "` | `");
  ASSERT_NE(pos, std::string::npos);
  missing.erase(pos + 1, missing.find('\n', pos + 1) - pos);
  EXPECT_FALSE(report_xref(missing, events).empty());
  EXPECT_FALSE(report_xref(r + "\nsee `7ZZZ0000000000000000000000`\n", events).empty());
}

TEST(Report, RandomCasesCrossReference) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CaseDriver d(seed);
    for (int i = 0; i < 50; ++i) d.step();
    const std::string r = generate_report(d.state(), ts("2024-02-01T00:00:00Z"));
    EXPECT_EQ(report_xref(r, d.events_json()), std::vector<std::string>{}) << seed;
  }
}

TEST(Timeline, EmptyCase) { EXPECT_TRUE(timeline(fresh_case()).empty()); }

TEST(Timeline, SortsAcrossTargetsAndMatchesBruteForce) {
  auto c = build_scripted_case();
  const Case& s = c.s().state();
  const auto t = timeline(s);
  ASSERT_EQ(t.size(), s.edges.size() + s.leaf_count());
  std::vector<std::pair<std::int64_t, std::string>> expected;
  for (const auto& [id, e] : s.edges) expected.emplace_back(e.at.unix_seconds(), id.str());
  for (const auto& [_, target] : s.targets) {
    for (const auto& l : target.leaves) expected.emplace_back(l.observed_from.unix_seconds(), l.id.str());
  }
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].at.unix_seconds(), expected[i].first);
    EXPECT_EQ(t[i].id, expected[i].second);
  }
}
