#include "flower/filter.hpp"
#include "flower/graph.hpp"
#include "flower/journal.hpp"
#include "flower/report.hpp"
#include "flower/session.hpp"
#include "flower/vault.hpp"

#include <benchmark/benchmark.h>

#include <array>
#include <memory>
#include <string>

using namespace flower;

namespace {

constexpr std::int64_t kEpoch = 1704067200;

SessionOptions options() {
  SessionOptions o;
  auto clock = std::make_shared<std::int64_t>(1717200000);
  o.clock = [clock] { return Timestamp::from_unix(++*clock); };
  o.ids = IdGenerator::seeded(7);
  return o;
}

SigningKey key() {
  std::array<std::uint8_t, 32> seed{};
  seed.fill(3);
  return SigningKey::from_seed(seed);
}

// A chain of `targets` hosts, each with two leaves and one evidence item.
Session build(int targets) {
  const SigningKey k = key();
  Session s = Session::create(Journal(), std::make_shared<MemoryBlobStore>(), "bench",
                              Timestamp::from_unix(kEpoch), "a", options());
  const auto q = s.pose_question(std::nullopt, "scope", "a").id;
  std::optional<TargetId> prev;
  for (int i = 0; i < targets; ++i) {
    const auto at = Timestamp::from_unix(kEpoch + 3600 * (i + 1));
    const auto t = s.add_target("host-" + std::to_string(i), at, "a").id;
    EvidenceMetadata m;
    m.step = s.plan_collection(q, i % 2 ? DataSourceCategory::Network : DataSourceCategory::Host, "src", "a").id;
    m.source_target = t;
    m.description = "item " + std::to_string(i);
    const std::string bytes = "blob " + std::to_string(i);
    const auto ev = s.ingest_evidence({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()}, m, "a", k)
                        .first.id;
    if (prev) {
      s.record_move(*prev, t, at, "smb", {ev}, "a");
    } else {
      s.record_initial_compromise(t, at, "phish", {ev}, "a");
    }
    s.record_action(t, LeafKind::InformationGathering, at, Timestamp::from_unix(at.unix_seconds() + 60), "recon", {},
                    "a");
    s.verify_item(ev, "a", k);
    prev = t;
  }
  return s;
}

void BM_Replay(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(replay(s.journal().events()));
  state.counters["events"] = static_cast<double>(s.journal().events().size());
}
BENCHMARK(BM_Replay)->Arg(8)->Arg(64);

void BM_StateDigest(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(state_digest(s.state()));
}
BENCHMARK(BM_StateDigest)->Arg(8)->Arg(64);

void BM_VerifyJournal(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_journal(s.journal().events()));
}
BENCHMARK(BM_VerifyJournal)->Arg(8)->Arg(64);

void BM_ValidateGraph(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(validate_graph(s.state()));
}
BENCHMARK(BM_ValidateGraph)->Arg(8)->Arg(64);

void BM_VerifyChain(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_chain(s.state()));
  state.counters["entries"] = static_cast<double>(s.state().custody.size());
}
BENCHMARK(BM_VerifyChain)->Arg(8)->Arg(64);

void BM_ApplyFilter(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  const auto spec = FilterSpec::all_of({FilterSpec::category(DataSourceCategory::Network),
                                        FilterSpec::negate(FilterSpec::keyword("item 1"))});
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(s.state(), spec));
}
BENCHMARK(BM_ApplyFilter)->Arg(8)->Arg(64);

void BM_GenerateReport(benchmark::State& state) {
  const Session s = build(static_cast<int>(state.range(0)));
  const auto at = Timestamp::from_unix(kEpoch);
  for (auto _ : state) benchmark::DoNotOptimize(generate_report(s.state(), at));
}
BENCHMARK(BM_GenerateReport)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
