#include "fixtures.hpp"

#include <atomic>
#include <random>
#include <string>
#include <unistd.h>

namespace flower::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("flower-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

SessionOptions fixed_options(std::uint64_t seed) {
  SessionOptions o;
  auto clock = std::make_shared<std::int64_t>(1717200000);
  o.clock = [clock] { return Timestamp::from_unix((*clock)++); };
  o.ids = IdGenerator::seeded(seed);
  return o;
}

ScriptedCase build_scripted_case(bool answer, std::uint64_t seed) {
  ScriptedCase c;
  const std::string a = "analyst1";
  c.session.emplace(Session::create(Journal(), c.blobs, "op-ruag", ts("2024-01-01T00:00:00Z"), a,
                                    fixed_options(seed)));
  Session& s = *c.session;
  s.register_key(c.key, a);
  s.annotate_attacker("APT-X", "public website reconnaissance", a);
  c.web = s.add_target("web-01", ts("2024-01-02T08:00:00Z"), a).id;
  c.db = s.add_target("db-02", ts("2024-01-03T09:00:00Z"), a).id;

  c.q_entry = s.pose_question(c.web, "How did the attacker(s) get onto the system?", a).id;
  c.q_move = s.pose_question(c.db, "How did the attacker reach db-02?", a).id;
  c.q_exfil = s.pose_question(std::nullopt, "How did the attacker(s) get the stolen data off the system?", a).id;

  c.s_entry = s.plan_collection(c.q_entry, DataSourceCategory::Host, "web-01 /var/log/auth", a).id;
  c.s_move = s.plan_collection(c.q_move, DataSourceCategory::Network, "netflow border router", a).id;
  c.s_exfil = s.plan_collection(c.q_exfil, DataSourceCategory::Network, "proxy logs", a).id;

  auto ingest = [&](const StepId& step, const std::string& text, const std::string& desc,
                    std::optional<TargetId> target, const char* at) {
    EvidenceMetadata m;
    m.step = step;
    m.source_target = target;
    m.description = desc;
    m.acquired_at = ts(at);
    const std::string bytes = text;
    return s
        .ingest_evidence({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()}, m, a, c.key)
        .first.id;
  };
  c.ev_auth = ingest(c.s_entry, "Jan 02 08:01 sshd accepted key for www", "sshd log of web-01", c.web,
                     "2024-01-05T10:00:00Z");
  c.ev_flow = ingest(c.s_move, "10.0.0.5 -> 10.0.1.9 445/tcp", "netflow export", std::nullopt,
                     "2024-01-05T11:00:00Z");
  c.ev_proxy = ingest(c.s_exfil, "CONNECT drop.example:443", "proxy log export", c.db, "2024-01-06T12:00:00Z");

  s.attach_collected(c.s_entry, {c.ev_auth}, a);
  s.attach_collected(c.s_move, {c.ev_flow}, a);
  s.attach_collected(c.s_exfil, {c.ev_proxy}, a);

  c.compromise = s.record_initial_compromise(c.web, ts("2024-01-02T08:00:00Z"), "spearphish attachment",
                                             {c.ev_auth}, a)
                     .id;
  s.record_action(c.web, LeafKind::EscalatePrivileges, ts("2024-01-02T09:00:00Z"), ts("2024-01-02T09:00:00Z"),
                  "kernel exploit", {c.ev_auth}, a, "T1068");
  s.record_action(c.web, LeafKind::MaintainAccess, ts("2024-01-02T09:30:00Z"), ts("2024-01-04T00:00:00Z"),
                  "backdoor + C2 beacon", {}, a);
  c.move = s.record_move(c.web, c.db, ts("2024-01-03T09:00:00Z"), "psexec", {c.ev_flow}, a).first.id;
  s.record_action(c.db, LeafKind::ActionsOnObjective, ts("2024-01-03T10:00:00Z"), ts("2024-01-03T12:00:00Z"),
                  "dump of customer table", {c.ev_proxy}, a);

  c.h_entry = s.propose_hypothesis(c.q_entry, "entry via spearphish", {c.ev_auth}, a).id;
  c.h_move = s.propose_hypothesis(c.q_move, "moved via psexec", {c.ev_flow}, a).id;
  c.h_exfil = s.propose_hypothesis(c.q_exfil, "exfil over https", {c.ev_proxy}, a).id;
  c.h_dns = s.propose_hypothesis(c.q_exfil, "exfil over dns", {c.ev_flow}, a).id;
  s.record_check(c.h_dns, "no tunnel pattern in dns", CheckOutcome::Refuted, {c.ev_flow}, a,
                 ts("2024-01-07T09:00:00Z"));
  if (answer) {
    s.record_check(c.h_entry, "timestamp match mail gw and first beacon", CheckOutcome::Verified, {c.ev_auth}, a,
                   ts("2024-01-07T10:00:00Z"));
    s.record_check(c.h_move, "smb session in flows", CheckOutcome::Verified, {c.ev_flow}, a,
                   ts("2024-01-07T11:00:00Z"));
    s.record_check(c.h_exfil, "volume match", CheckOutcome::Verified, {c.ev_proxy}, a, ts("2024-01-07T12:00:00Z"));
    s.answer_question(c.q_entry, c.h_entry, a);
    s.answer_question(c.q_move, c.h_move, a);
    s.answer_question(c.q_exfil, c.h_exfil, a);
  }
  return c;
}

}  // namespace flower::testing
