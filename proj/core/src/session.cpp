#include "flower/session.hpp"

#include "flower/error.hpp"
#include "flower/reducer.hpp"

namespace flower {
namespace {

nlohmann::json evidence_json(const std::vector<EvidenceId>& ids) { return normalized(ids); }

}  // namespace

Session::Session(Journal journal, std::shared_ptr<BlobStore> blobs, SessionOptions options)
    : journal_(std::move(journal)), blobs_(std::move(blobs)), options_(std::move(options)) {}

Session Session::create(Journal journal, std::shared_ptr<BlobStore> blobs, const std::string& name,
                        Timestamp opened_at, const std::string& actor, SessionOptions options,
                        std::optional<std::string> attacker_label) {
  if (!journal.events().empty()) throw Error(ErrorKind::InvalidState, "journal already holds a case");
  Session s(std::move(journal), std::move(blobs), std::move(options));
  if (name.empty()) throw Error(ErrorKind::EmptyName, "case name must not be empty");
  nlohmann::json payload = {{"id", s.next_id()}, {"name", name}, {"opened_at", opened_at}};
  if (attacker_label) payload["attacker_label"] = *attacker_label;
  s.commit(event::kCreateCase, std::move(payload), actor);
  return s;
}

Session Session::resume(Journal journal, std::shared_ptr<BlobStore> blobs, SessionOptions options) {
  Case c = replay(journal.events());
  Session s(std::move(journal), std::move(blobs), std::move(options));
  s.state_ = std::move(c);
  s.observe_ids(s.state_);
  return s;
}

void Session::observe_ids(const Case& c) {
  auto& g = options_.ids;
  g.observe(c.id.str());
  for (const auto& [id, t] : c.targets) {
    g.observe(id.str());
    for (const auto& l : t.leaves) g.observe(l.id.str());
  }
  for (const auto& [id, _] : c.edges) g.observe(id.str());
  for (const auto& [id, _] : c.questions) g.observe(id.str());
  for (const auto& [id, _] : c.steps) g.observe(id.str());
  for (const auto& [id, h] : c.hypotheses) {
    g.observe(id.str());
    for (const auto& chk : h.checks) g.observe(chk.id.str());
  }
  for (const auto& [id, _] : c.evidence) g.observe(id.str());
}

std::size_t Session::sync() {
  const std::size_t before = journal_.events().size();
  const std::size_t added = journal_.refresh();
  for (std::size_t i = before; i < journal_.events().size(); ++i) {
    apply_event(state_, journal_.events()[i]);
  }
  if (added > 0) observe_ids(state_);
  return added;
}

std::string Session::next_id() { return options_.ids.next(options_.clock()); }

const JournalEvent& Session::commit(std::string_view kind, nlohmann::json payload, const std::string& actor) {
  JournalEvent ev = journal_.prepare(std::string(kind), std::move(payload), actor, options_.clock());
  Case next = state_;
  apply_event(next, ev);
  journal_.persist(ev);
  if (options_.after_persist) options_.after_persist(journal_.events().back());
  state_ = std::move(next);
  return journal_.events().back();
}

void Session::annotate_attacker(const std::string& label, std::optional<std::string> notes,
                                const std::string& actor) {
  nlohmann::json p = {{"label", label}};
  if (notes) p["info_gathering_notes"] = *notes;
  commit(event::kAnnotateAttacker, std::move(p), actor);
}

TargetNode Session::add_target(const std::string& label, Timestamp first_seen, const std::string& actor,
                               const std::string& notes) {
  const TargetId id(next_id());
  commit(event::kAddTarget, {{"id", id}, {"label", label}, {"first_seen", first_seen}, {"notes", notes}},
         actor);
  return state_.targets.at(id);
}

EdgeEvent Session::record_initial_compromise(TargetId dest, Timestamp at, const std::string& vector,
                                             std::vector<EvidenceId> evidence, const std::string& actor) {
  const EdgeId id(next_id());
  commit(event::kRecordInitialCompromise,
         {{"id", id}, {"dest", dest}, {"at", at}, {"vector", vector}, {"evidence", evidence_json(evidence)}},
         actor);
  return state_.edges.at(id);
}

std::pair<EdgeEvent, ActionLeaf> Session::record_move(TargetId source, TargetId dest,
                                                      Timestamp at, const std::string& technique,
                                                      std::vector<EvidenceId> evidence,
                                                      const std::string& actor) {
  const EdgeId edge_id(next_id());
  const LeafId leaf_id(next_id());
  commit(event::kRecordMove,
         {{"edge_id", edge_id},
          {"leaf_id", leaf_id},
          {"source", source},
          {"dest", dest},
          {"at", at},
          {"technique", technique},
          {"evidence", evidence_json(evidence)}},
         actor);
  return {state_.edges.at(edge_id), *state_.find_leaf(leaf_id)};
}

ActionLeaf Session::record_action(TargetId target, LeafKind kind, Timestamp from, Timestamp to,
                                  const std::string& description, std::vector<EvidenceId> evidence,
                                  const std::string& actor, std::optional<std::string> technique) {
  const LeafId id(next_id());
  nlohmann::json p = {{"id", id},
                      {"target", target},
                      {"kind", to_string(kind)},
                      {"observed_from", from},
                      {"observed_to", to},
                      {"description", description},
                      {"evidence", evidence_json(evidence)}};
  if (technique) p["technique"] = *technique;
  commit(event::kRecordAction, std::move(p), actor);
  return *state_.find_leaf(id);
}

Question Session::pose_question(std::optional<TargetId> scope, const std::string& text,
                                const std::string& actor, std::optional<HypothesisId> spawned_from) {
  const QuestionId id(next_id());
  nlohmann::json p = {{"id", id}, {"text", text}};
  if (scope) p["scope"] = *scope;
  if (spawned_from) p["spawned_from"] = *spawned_from;
  commit(event::kPoseQuestion, std::move(p), actor);
  return state_.questions.at(id);
}

Question Session::withdraw_question(QuestionId question, const std::string& actor) {
  commit(event::kWithdrawQuestion, {{"question", question}}, actor);
  return state_.questions.at(question);
}

CollectionStep Session::plan_collection(QuestionId question, DataSourceCategory category,
                                        const std::string& source_description, const std::string& actor) {
  const StepId id(next_id());
  commit(event::kPlanCollection,
         {{"id", id},
          {"question", question},
          {"category", to_string(category)},
          {"source_description", source_description}},
         actor);
  return state_.steps.at(id);
}

CollectionStep Session::attach_collected(StepId step, std::vector<EvidenceId> evidence,
                                         const std::string& actor) {
  commit(event::kAttachCollected, {{"step", step}, {"evidence", evidence_json(evidence)}}, actor);
  return state_.steps.at(step);
}

std::vector<EvidenceId> Session::run_filter(const FilterSpec& spec, std::optional<QuestionId> question,
                                            const std::string& actor) {
  auto result = apply_filter(state_, spec);
  if (state_.state == CaseState::Closed) return result;
  nlohmann::json p = {{"expression", spec.to_json()}, {"result", result}};
  if (question) p["question"] = *question;
  commit(event::kApplyFilter, std::move(p), actor);
  return result;
}

Hypothesis Session::propose_hypothesis(QuestionId question, const std::string& statement,
                                       std::vector<EvidenceId> supporting, const std::string& actor) {
  const HypothesisId id(next_id());
  commit(event::kProposeHypothesis,
         {{"id", id}, {"question", question}, {"statement", statement}, {"supporting", evidence_json(supporting)}},
         actor);
  return state_.hypotheses.at(id);
}

VerificationCheck Session::record_check(HypothesisId hypothesis, const std::string& description,
                                        CheckOutcome outcome, std::vector<EvidenceId> evidence,
                                        const std::string& actor, Timestamp at) {
  const CheckId id(next_id());
  commit(event::kRecordCheck,
         {{"id", id},
          {"hypothesis", hypothesis},
          {"description", description},
          {"outcome", to_string(outcome)},
          {"evidence", evidence_json(evidence)},
          {"at", at}},
         actor);
  return state_.hypotheses.at(hypothesis).checks.back();
}

Question Session::answer_question(QuestionId question, HypothesisId hypothesis,
                                  const std::string& actor) {
  commit(event::kAnswerQuestion, {{"question", question}, {"hypothesis", hypothesis}}, actor);
  return state_.questions.at(question);
}

IterationRecord Session::open_iteration(const std::string& trigger, Timestamp at, const std::string& actor) {
  commit(event::kOpenIteration, {{"trigger", trigger}, {"at", at}}, actor);
  return state_.iterations.back();
}

ClosureReport Session::closure_status() const { return flower::closure_status(state_); }

void Session::close_case(const std::string& actor, Timestamp at) {
  if (state_.state == CaseState::Closed) {
    throw Error(ErrorKind::CaseClosed, "case " + state_.id.str() + " is closed");
  }
  commit(event::kCloseCase, {{"at", at}}, actor);
}

SignerKey Session::register_key(const SigningKey& key, const std::string& actor) {
  const std::string id = key.key_id();
  if (auto it = state_.signer_keys.find(id); it != state_.signer_keys.end()) return it->second;
  commit(event::kRegisterKey, {{"key_id", id}, {"public_key", key.public_key()}}, actor);
  return state_.signer_keys.at(id);
}

std::pair<EvidenceItem, CustodyEntry> Session::ingest_evidence(std::span<const std::uint8_t> bytes,
                                                               const EvidenceMetadata& metadata,
                                                               const std::string& actor,
                                                               const SigningKey& key) {
  if (state_.state == CaseState::Closed) {
    throw Error(ErrorKind::CaseClosed, "case " + state_.id.str() + " is closed");
  }
  auto step = state_.steps.find(metadata.step);
  if (step == state_.steps.end()) {
    throw Error(ErrorKind::NotFound, "collection step " + metadata.step.str() + " not found");
  }
  register_key(key, actor);

  EvidenceItem item;
  item.id = EvidenceId(next_id());
  item.content_hash = sha256_hex(bytes);
  item.size_bytes = bytes.size();
  item.category = metadata.category.value_or(step->second.category);
  item.source_target = metadata.source_target;
  item.acquired_at = metadata.acquired_at.value_or(options_.clock());
  item.acquired_by = actor;
  item.description = metadata.description;
  item.storage_path = BlobStore::relative_path(item.content_hash);
  item.collection_step = metadata.step;

  const CustodyEntry entry =
      make_custody_entry(state_.custody, item.id, CustodyAction::Ingested, actor, options_.clock(), key);
  JournalEvent ev = journal_.prepare(std::string(event::kIngestEvidence),
                                     {{"item", to_json(item)}, {"custody", to_json(entry)}}, actor,
                                     options_.clock());
  Case next = state_;
  apply_event(next, ev);
  // Blob first, then the journal line that references it.
  if (blobs_->put(bytes) != item.content_hash) {
    throw Error(ErrorKind::StorageError, "blob store returned an unexpected hash");
  }
  journal_.persist(ev);
  if (options_.after_persist) options_.after_persist(journal_.events().back());
  state_ = std::move(next);
  return {state_.evidence.at(item.id), state_.custody.back()};
}

VerificationResult Session::verify_item(EvidenceId id, const std::string& actor, const SigningKey& key) {
  auto it = state_.evidence.find(id);
  if (it == state_.evidence.end()) throw Error(ErrorKind::NotFound, "evidence " + id.str() + " not found");
  const VerificationResult result = verify_blob(*blobs_, it->second);
  register_key(key, actor);
  const CustodyEntry entry =
      make_custody_entry(state_.custody, id, CustodyAction::Verified, actor, options_.clock(), key);
  nlohmann::json p = result.to_json();
  p["custody"] = to_json(entry);
  commit(event::kVerifyItem, std::move(p), actor);
  if (result.status == VerifyStatus::BlobMissing) {
    throw Error(ErrorKind::BlobMissing, "blob " + result.expected + " for evidence " + id.str() + " is missing",
                result.to_json());
  }
  return result;
}

Bytes Session::read_for_custody(EvidenceId id, CustodyAction action, std::string_view kind,
                                const std::string& actor, const SigningKey& key) {
  auto it = state_.evidence.find(id);
  if (it == state_.evidence.end()) throw Error(ErrorKind::NotFound, "evidence " + id.str() + " not found");
  auto bytes = blobs_->get(it->second.content_hash);
  if (!bytes) throw Error(ErrorKind::BlobMissing, "blob for evidence " + id.str() + " is missing");
  register_key(key, actor);
  const CustodyEntry entry = make_custody_entry(state_.custody, id, action, actor, options_.clock(), key);
  commit(kind, {{"evidence", id}, {"custody", to_json(entry)}}, actor);
  return std::move(*bytes);
}

Bytes Session::export_evidence(EvidenceId id, const std::string& actor, const SigningKey& key) {
  return read_for_custody(id, CustodyAction::Exported, event::kExportEvidence, actor, key);
}

Bytes Session::access_evidence(EvidenceId id, const std::string& actor, const SigningKey& key) {
  return read_for_custody(id, CustodyAction::Accessed, event::kAccessEvidence, actor, key);
}

ChainResult Session::verify_chain() const { return flower::verify_chain(state_); }

}  // namespace flower
