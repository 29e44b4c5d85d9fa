#include "flower/reducer.hpp"

#include "flower/closure.hpp"
#include "flower/crypto.hpp"
#include "flower/error.hpp"
#include "flower/filter.hpp"
#include "flower/vault.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>

namespace flower {
namespace {

constexpr std::array<std::string_view, 21> kKinds = {
    event::kCreateCase,      event::kAnnotateAttacker,  event::kAddTarget,
    event::kRecordInitialCompromise, event::kRecordMove, event::kRecordAction,
    event::kPoseQuestion,    event::kWithdrawQuestion,  event::kPlanCollection,
    event::kAttachCollected, event::kApplyFilter,       event::kProposeHypothesis,
    event::kRecordCheck,     event::kAnswerQuestion,    event::kOpenIteration,
    event::kRegisterKey,     event::kIngestEvidence,    event::kVerifyItem,
    event::kExportEvidence,  event::kAccessEvidence,    event::kCloseCase,
};

// ---- payload access -------------------------------------------------------

const nlohmann::json& arg(const nlohmann::json& p, std::string_view key) {
  auto it = p.find(key);
  if (it == p.end()) {
    throw Error(ErrorKind::ValidationError, "payload is missing '" + std::string(key) + "'");
  }
  return *it;
}

template <class T>
T get(const nlohmann::json& p, std::string_view key) {
  try {
    return arg(p, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ValidationError, "payload field '" + std::string(key) + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& p, std::string_view key) {
  auto it = p.find(key);
  if (it == p.end() || it->is_null()) return std::nullopt;
  return get<T>(p, key);
}

template <class E>
E get_enum(const nlohmann::json& p, std::string_view key) {
  return parse_enum<E>(get<std::string>(p, key));
}

std::vector<EvidenceId> get_evidence(const nlohmann::json& p, std::string_view key) {
  if (!p.contains(key)) return {};
  return normalized(get<std::vector<EvidenceId>>(p, key));
}

// ---- preconditions --------------------------------------------------------

void require_genesis(const Case& c) {
  if (c.id.empty()) throw Error(ErrorKind::NoGenesis, "case has not been created");
}

void require_open(const Case& c) {
  require_genesis(c);
  if (c.state == CaseState::Closed) throw Error(ErrorKind::CaseClosed, "case " + c.id.str() + " is closed");
}

void require_text(const std::string& text, std::string_view what) {
  if (text.empty()) throw Error(ErrorKind::ValidationError, std::string(what) + " must not be empty");
}

template <class Map, class Key>
auto& find_or_throw(Map& m, const Key& key, std::string_view what) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(ErrorKind::NotFound, std::string(what) + " " + key.str() + " not found");
  return it->second;
}

void require_target(const Case& c, const TargetId& t) { find_or_throw(c.targets, t, "target"); }

void require_evidence(const Case& c, const std::vector<EvidenceId>& ids) {
  for (const auto& id : ids) {
    if (!c.evidence.contains(id)) {
      throw Error(ErrorKind::DanglingEvidenceRef, "evidence " + id.str() + " is not in the vault",
                  {{"evidence", id}});
    }
  }
}

bool terminal(QuestionState s) { return s == QuestionState::Answered || s == QuestionState::Withdrawn; }

void close_open_iteration(std::vector<IterationRecord>& iterations, Timestamp at) {
  if (!iterations.empty() && !iterations.back().closed_at) iterations.back().closed_at = at;
}

void open_iteration(std::vector<IterationRecord>& iterations, Timestamp at, std::string trigger) {
  close_open_iteration(iterations, at);
  const std::uint64_t seq = iterations.empty() ? 1 : iterations.back().seq + 1;
  iterations.push_back({seq, at, std::nullopt, std::move(trigger)});
}

CustodyEntry checked_custody(const Case& c, const nlohmann::json& payload, CustodyAction action,
                             const EvidenceId& evidence) {
  CustodyEntry e = custody_from_json(arg(payload, "custody"));
  const std::string prev = c.custody.empty() ? std::string(kZeroHash) : c.custody.back().entry_hash;
  if (e.seq != c.custody.size() + 1 || e.prev_hash != prev) {
    throw Error(ErrorKind::ValidationError, "custody entry does not extend the chain");
  }
  if (e.action != action || e.evidence != evidence) {
    throw Error(ErrorKind::ValidationError, "custody entry does not describe this operation");
  }
  if (!c.signer_keys.contains(e.signer_key_id)) {
    throw Error(ErrorKind::SigningError, "signer " + e.signer_key_id + " is not registered");
  }
  if (custody_entry_hash(e) != e.entry_hash) {
    throw Error(ErrorKind::ValidationError, "custody entry hash mismatch");
  }
  return e;
}

// ---- handlers -------------------------------------------------------------

using Handler = void (*)(Case&, const JournalEvent&);

void on_create_case(Case& c, const JournalEvent& ev) {
  if (!c.id.empty()) throw Error(ErrorKind::InvalidState, "case already created");
  const auto& p = ev.payload;
  const auto name = get<std::string>(p, "name");
  if (name.empty()) throw Error(ErrorKind::EmptyName, "case name must not be empty");
  Case fresh;
  fresh.id = get<CaseId>(p, "id");
  fresh.name = name;
  fresh.opened_at = get<Timestamp>(p, "opened_at");
  fresh.opened_by = ev.actor;
  if (auto label = get_opt<std::string>(p, "attacker_label")) fresh.attacker.label = *label;
  open_iteration(fresh.iterations, fresh.opened_at, "initial");
  c = std::move(fresh);
}

void on_annotate_attacker(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto label = get<std::string>(ev.payload, "label");
  require_text(label, "attacker label");
  c.attacker.label = label;
  c.attacker.info_gathering_notes = get_opt<std::string>(ev.payload, "info_gathering_notes");
}

void on_add_target(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  TargetNode t;
  t.id = get<TargetId>(p, "id");
  t.label = get<std::string>(p, "label");
  require_text(t.label, "target label");
  t.first_seen = get<Timestamp>(p, "first_seen");
  t.notes = get_opt<std::string>(p, "notes").value_or("");
  if (c.targets.contains(t.id)) throw Error(ErrorKind::InvalidState, "duplicate target id");
  c.targets.emplace(t.id, std::move(t));
}

void on_initial_compromise(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  EdgeEvent e;
  e.id = get<EdgeId>(p, "id");
  e.kind = EdgeKind::InitialCompromise;
  e.dest = get<TargetId>(p, "dest");
  e.at = get<Timestamp>(p, "at");
  e.vector = get<std::string>(p, "vector");
  e.evidence = get_evidence(p, "evidence");
  require_target(c, e.dest);
  require_evidence(c, e.evidence);
  if (c.edges.contains(e.id)) throw Error(ErrorKind::InvalidState, "duplicate edge id");
  c.edges.emplace(e.id, std::move(e));
}

void on_record_move(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  const auto source = get<TargetId>(p, "source");
  const auto dest = get<TargetId>(p, "dest");
  const auto at = get<Timestamp>(p, "at");
  if (source == dest) {
    throw Error(ErrorKind::SelfMove, "move source and destination are both " + source.str());
  }
  require_target(c, source);
  require_target(c, dest);
  const auto evidence = get_evidence(p, "evidence");
  require_evidence(c, evidence);
  const auto earliest = c.earliest_inbound(source);
  if (!earliest) {
    throw Error(ErrorKind::TemporalViolation,
                "source " + source.str() + " has no inbound edge; it is not known to be compromised");
  }
  if (at < *earliest) {
    throw Error(ErrorKind::TemporalViolation, "move at " + at.to_string() +
                                                  " precedes the compromise of the source at " +
                                                  earliest->to_string());
  }
  EdgeEvent e;
  e.id = get<EdgeId>(p, "edge_id");
  e.kind = EdgeKind::Move;
  e.source = source;
  e.dest = dest;
  e.at = at;
  e.vector = get<std::string>(p, "technique");
  e.evidence = evidence;

  ActionLeaf leaf;
  leaf.id = get<LeafId>(p, "leaf_id");
  leaf.target = source;
  leaf.kind = LeafKind::Move;
  leaf.observed_from = at;
  leaf.observed_to = at;
  leaf.description = "move to " + c.targets.at(dest).label;
  leaf.technique = e.vector;
  leaf.evidence = evidence;
  leaf.edge = e.id;

  if (c.edges.contains(e.id) || c.find_leaf(leaf.id)) {
    throw Error(ErrorKind::InvalidState, "duplicate edge or leaf id");
  }
  c.edges.emplace(e.id, std::move(e));
  c.targets.at(source).leaves.push_back(std::move(leaf));
}

void on_record_action(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  ActionLeaf leaf;
  leaf.kind = get_enum<LeafKind>(p, "kind");
  if (leaf.kind == LeafKind::Move) {
    throw Error(ErrorKind::UseRecordMove, "move leaves are created by record_move");
  }
  leaf.id = get<LeafId>(p, "id");
  leaf.target = get<TargetId>(p, "target");
  require_target(c, leaf.target);
  leaf.observed_from = get<Timestamp>(p, "observed_from");
  leaf.observed_to = get<Timestamp>(p, "observed_to");
  if (leaf.observed_to < leaf.observed_from) {
    throw Error(ErrorKind::ValidationError, "observed_from must not be after observed_to");
  }
  leaf.description = get<std::string>(p, "description");
  leaf.technique = get_opt<std::string>(p, "technique");
  leaf.evidence = get_evidence(p, "evidence");
  require_evidence(c, leaf.evidence);
  if (c.find_leaf(leaf.id)) throw Error(ErrorKind::InvalidState, "duplicate leaf id");
  c.targets.at(leaf.target).leaves.push_back(std::move(leaf));
}

void on_pose_question(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  Question q;
  q.id = get<QuestionId>(p, "id");
  q.text = get<std::string>(p, "text");
  require_text(q.text, "question text");
  q.scope = get_opt<TargetId>(p, "scope");
  if (q.scope) require_target(c, *q.scope);
  q.spawned_from = get_opt<HypothesisId>(p, "spawned_from");
  if (q.spawned_from) find_or_throw(c.hypotheses, *q.spawned_from, "hypothesis");
  if (c.questions.contains(q.id)) throw Error(ErrorKind::InvalidState, "duplicate question id");
  c.questions.emplace(q.id, std::move(q));
}

void on_withdraw_question(Case& c, const JournalEvent& ev) {
  require_open(c);
  auto& q = find_or_throw(c.questions, get<QuestionId>(ev.payload, "question"), "question");
  if (terminal(q.state)) {
    throw Error(ErrorKind::InvalidState,
                "question " + q.id.str() + " is " + std::string(to_string(q.state)));
  }
  q.state = QuestionState::Withdrawn;
}

void on_plan_collection(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  CollectionStep s;
  s.id = get<StepId>(p, "id");
  s.question = get<QuestionId>(p, "question");
  s.category = get_enum<DataSourceCategory>(p, "category");
  s.source_description = get<std::string>(p, "source_description");
  auto& q = find_or_throw(c.questions, s.question, "question");
  if (terminal(q.state)) {
    throw Error(ErrorKind::InvalidState,
                "question " + q.id.str() + " is " + std::string(to_string(q.state)));
  }
  require_text(s.source_description, "source description");
  if (c.steps.contains(s.id)) throw Error(ErrorKind::InvalidState, "duplicate step id");
  if (q.state == QuestionState::Open) q.state = QuestionState::Collecting;
  c.steps.emplace(s.id, std::move(s));
}

void on_attach_collected(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  auto& step = find_or_throw(c.steps, get<StepId>(p, "step"), "collection step");
  if (step.status != StepStatus::Planned) {
    throw Error(ErrorKind::InvalidState, "collection step " + step.id.str() + " is already done");
  }
  const auto ids = get_evidence(p, "evidence");
  require_evidence(c, ids);
  for (const auto& id : ids) {
    if (c.evidence.at(id).collection_step != step.id) {
      throw Error(ErrorKind::Mismatch,
                  "evidence " + id.str() + " was not ingested against step " + step.id.str());
    }
  }
  step.collected = ids;
  step.status = StepStatus::Done;
}

void on_apply_filter(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  FilterRecord r;
  r.journal_seq = ev.seq;
  r.actor = ev.actor;
  r.question = get_opt<QuestionId>(p, "question");
  if (r.question) find_or_throw(c.questions, *r.question, "question");
  const FilterSpec spec = FilterSpec::from_json(arg(p, "expression"));
  r.expression = spec.to_json();
  r.result = apply_filter(c, spec);
  if (p.contains("result") && get_evidence(p, "result") != r.result) {
    throw Error(ErrorKind::ValidationError, "recorded filter result differs from evaluation");
  }
  c.filters.push_back(std::move(r));
}

void on_propose_hypothesis(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  Hypothesis h;
  h.id = get<HypothesisId>(p, "id");
  h.question = get<QuestionId>(p, "question");
  h.statement = get<std::string>(p, "statement");
  h.supporting = get_evidence(p, "supporting");
  auto& q = find_or_throw(c.questions, h.question, "question");
  if (q.state != QuestionState::Collecting && q.state != QuestionState::Hypothesizing) {
    throw Error(ErrorKind::InvalidState,
                "question " + q.id.str() + " is " + std::string(to_string(q.state)) +
                    "; plan a collection step before proposing hypotheses");
  }
  require_text(h.statement, "hypothesis statement");
  require_evidence(c, h.supporting);
  if (c.hypotheses.contains(h.id)) throw Error(ErrorKind::InvalidState, "duplicate hypothesis id");
  q.state = QuestionState::Hypothesizing;
  c.hypotheses.emplace(h.id, std::move(h));
}

void on_record_check(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  auto& h = find_or_throw(c.hypotheses, get<HypothesisId>(p, "hypothesis"), "hypothesis");
  if (h.state != HypothesisState::Proposed) {
    throw Error(ErrorKind::InvalidState,
                "hypothesis " + h.id.str() + " is already " + std::string(to_string(h.state)));
  }
  VerificationCheck check;
  check.id = get<CheckId>(p, "id");
  check.description = get<std::string>(p, "description");
  require_text(check.description, "check description");
  check.outcome = get_enum<CheckOutcome>(p, "outcome");
  check.evidence = get_evidence(p, "evidence");
  check.at = get<Timestamp>(p, "at");
  check.actor = ev.actor;
  require_evidence(c, check.evidence);
  if (check.outcome == CheckOutcome::Verified && h.supporting.empty()) {
    throw Error(ErrorKind::InvalidState,
                "hypothesis " + h.id.str() + " has no supporting evidence and cannot be verified");
  }
  if (check.outcome == CheckOutcome::Verified) {
    h.state = HypothesisState::Verified;
  } else {
    h.state = HypothesisState::Refuted;
    open_iteration(c.iterations, check.at, "hypothesis refuted");
  }
  h.checks.push_back(std::move(check));
}

void on_answer_question(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  auto& q = find_or_throw(c.questions, get<QuestionId>(p, "question"), "question");
  const auto& h = find_or_throw(c.hypotheses, get<HypothesisId>(p, "hypothesis"), "hypothesis");
  if (terminal(q.state)) {
    throw Error(ErrorKind::InvalidState,
                "question " + q.id.str() + " is " + std::string(to_string(q.state)));
  }
  if (h.question != q.id) {
    throw Error(ErrorKind::Mismatch,
                "hypothesis " + h.id.str() + " belongs to question " + h.question.str());
  }
  if (h.state != HypothesisState::Verified) {
    throw Error(ErrorKind::NotProven,
                "hypothesis " + h.id.str() + " is " + std::string(to_string(h.state)));
  }
  q.state = QuestionState::Answered;
  q.answer = h.id;
}

void on_open_iteration(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto trigger = get<std::string>(ev.payload, "trigger");
  if (trigger != "new evidence" && trigger != "new question") {
    throw Error(ErrorKind::ValidationError,
                "iteration trigger must be 'new evidence' or 'new question'");
  }
  open_iteration(c.iterations, get<Timestamp>(ev.payload, "at"), trigger);
}

void on_register_key(Case& c, const JournalEvent& ev) {
  require_genesis(c);
  SignerKey key{get<std::string>(ev.payload, "key_id"), get<std::string>(ev.payload, "public_key")};
  if (key_id_for(key.public_key) != key.key_id) {
    throw Error(ErrorKind::ValidationError, "key id does not match the public key");
  }
  if (c.signer_keys.contains(key.key_id)) {
    throw Error(ErrorKind::InvalidState, "signer " + key.key_id + " is already registered");
  }
  c.signer_keys.emplace(key.key_id, std::move(key));
}

void on_ingest_evidence(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto& p = ev.payload;
  EvidenceItem item = evidence_from_json(arg(p, "item"));
  if (!is_hex_digest(item.content_hash)) {
    throw Error(ErrorKind::ValidationError, "content hash must be 64 lowercase hex characters");
  }
  if (item.storage_path != BlobStore::relative_path(item.content_hash)) {
    throw Error(ErrorKind::ValidationError, "storage path does not match the content hash");
  }
  if (!item.collection_step) {
    throw Error(ErrorKind::InvalidState, "evidence must be ingested against a planned collection step");
  }
  const auto& step = find_or_throw(c.steps, *item.collection_step, "collection step");
  if (step.status != StepStatus::Planned) {
    throw Error(ErrorKind::InvalidState, "collection step " + step.id.str() + " is already done");
  }
  const auto& q = c.questions.at(step.question);
  if (terminal(q.state)) {
    throw Error(ErrorKind::InvalidState, "collection step " + step.id.str() + " serves a " +
                                             std::string(to_string(q.state)) + " question");
  }
  if (item.source_target) require_target(c, *item.source_target);
  if (c.evidence.contains(item.id)) throw Error(ErrorKind::InvalidState, "duplicate evidence id");
  CustodyEntry entry = checked_custody(c, p, CustodyAction::Ingested, item.id);
  c.evidence.emplace(item.id, std::move(item));
  c.custody.push_back(std::move(entry));
}

void custody_only(Case& c, const JournalEvent& ev, CustodyAction action) {
  require_genesis(c);
  const auto id = get<EvidenceId>(ev.payload, "evidence");
  find_or_throw(c.evidence, id, "evidence");
  c.custody.push_back(checked_custody(c, ev.payload, action, id));
}

void on_verify_item(Case& c, const JournalEvent& ev) { custody_only(c, ev, CustodyAction::Verified); }
void on_export_evidence(Case& c, const JournalEvent& ev) { custody_only(c, ev, CustodyAction::Exported); }
void on_access_evidence(Case& c, const JournalEvent& ev) { custody_only(c, ev, CustodyAction::Accessed); }

void on_close_case(Case& c, const JournalEvent& ev) {
  require_open(c);
  const auto at = get<Timestamp>(ev.payload, "at");
  const ClosureReport report = closure_status(c);
  if (!report.closed_allowed) {
    throw Error(ErrorKind::ClosureBlocked, "closure predicate is not satisfied", report.to_json());
  }
  c.state = CaseState::Closed;
  c.closed_at = at;
  c.closed_by = ev.actor;
  close_open_iteration(c.iterations, at);
}

const std::map<std::string_view, Handler>& handlers() {
  static const std::map<std::string_view, Handler> table = {
      {event::kCreateCase, on_create_case},
      {event::kAnnotateAttacker, on_annotate_attacker},
      {event::kAddTarget, on_add_target},
      {event::kRecordInitialCompromise, on_initial_compromise},
      {event::kRecordMove, on_record_move},
      {event::kRecordAction, on_record_action},
      {event::kPoseQuestion, on_pose_question},
      {event::kWithdrawQuestion, on_withdraw_question},
      {event::kPlanCollection, on_plan_collection},
      {event::kAttachCollected, on_attach_collected},
      {event::kApplyFilter, on_apply_filter},
      {event::kProposeHypothesis, on_propose_hypothesis},
      {event::kRecordCheck, on_record_check},
      {event::kAnswerQuestion, on_answer_question},
      {event::kOpenIteration, on_open_iteration},
      {event::kRegisterKey, on_register_key},
      {event::kIngestEvidence, on_ingest_evidence},
      {event::kVerifyItem, on_verify_item},
      {event::kExportEvidence, on_export_evidence},
      {event::kAccessEvidence, on_access_evidence},
      {event::kCloseCase, on_close_case},
  };
  return table;
}

}  // namespace

std::span<const std::string_view> known_event_kinds() noexcept { return kKinds; }

bool is_known_event_kind(std::string_view kind) noexcept {
  return std::find(kKinds.begin(), kKinds.end(), kind) != kKinds.end();
}

void apply_event(Case& c, const JournalEvent& ev) {
  auto it = handlers().find(ev.kind);
  if (it == handlers().end()) {
    throw Error(ErrorKind::UnknownEventKind, "unknown journal event kind '" + ev.kind + "'");
  }
  it->second(c, ev);
}

}  // namespace flower
