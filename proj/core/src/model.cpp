#include "flower/model.hpp"

#include "flower/error.hpp"

#include <algorithm>
#include <utility>

namespace flower {
namespace {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<LeafKind, 6> kLeafNames = {{
    {LeafKind::EscalatePrivileges, "escalate_privileges"},
    {LeafKind::MaintainAccess, "maintain_access"},
    {LeafKind::InformationGathering, "information_gathering"},
    {LeafKind::ActionsOnObjective, "actions_on_objective"},
    {LeafKind::CoverTracks, "cover_tracks"},
    {LeafKind::Move, "move"},
}};
constexpr NameTable<EdgeKind, 2> kEdgeNames = {{
    {EdgeKind::InitialCompromise, "initial_compromise"},
    {EdgeKind::Move, "move"},
}};
constexpr NameTable<CaseState, 2> kCaseStateNames = {{
    {CaseState::Open, "open"},
    {CaseState::Closed, "closed"},
}};
constexpr NameTable<QuestionState, 5> kQuestionStateNames = {{
    {QuestionState::Open, "open"},
    {QuestionState::Collecting, "collecting"},
    {QuestionState::Hypothesizing, "hypothesizing"},
    {QuestionState::Answered, "answered"},
    {QuestionState::Withdrawn, "withdrawn"},
}};
constexpr NameTable<DataSourceCategory, 3> kCategoryNames = {{
    {DataSourceCategory::Host, "host"},
    {DataSourceCategory::Network, "network"},
    {DataSourceCategory::Misc, "misc"},
}};
constexpr NameTable<StepStatus, 2> kStepStatusNames = {{
    {StepStatus::Planned, "planned"},
    {StepStatus::Done, "done"},
}};
constexpr NameTable<HypothesisState, 3> kHypothesisStateNames = {{
    {HypothesisState::Proposed, "proposed"},
    {HypothesisState::Verified, "verified"},
    {HypothesisState::Refuted, "refuted"},
}};
constexpr NameTable<CheckOutcome, 2> kOutcomeNames = {{
    {CheckOutcome::Verified, "verified"},
    {CheckOutcome::Refuted, "refuted"},
}};
constexpr NameTable<CustodyAction, 4> kCustodyNames = {{
    {CustodyAction::Ingested, "ingested"},
    {CustodyAction::Accessed, "accessed"},
    {CustodyAction::Exported, "exported"},
    {CustodyAction::Verified, "verified"},
}};

template <class E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) noexcept {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

template <class E, std::size_t N>
E value_of(const NameTable<E, N>& table, std::string_view text, std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  throw Error(ErrorKind::ValidationError,
              "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

// ---- JSON field helpers ---------------------------------------------------

const nlohmann::json& field(const nlohmann::json& j, std::string_view key) {
  if (!j.is_object()) throw Error(ErrorKind::ValidationError, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorKind::ValidationError, "missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string str_field(const nlohmann::json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_string()) {
    throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

std::string str_or(const nlohmann::json& j, std::string_view key, std::string fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) {
    throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> opt_str(const nlohmann::json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be a string");
  }
  return it->get<std::string>();
}

template <class T>
std::optional<T> opt_field(const nlohmann::json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::uint64_t uint_field(const nlohmann::json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::ValidationError,
                "field '" + std::string(key) + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <class E>
E enum_field(const nlohmann::json& j, std::string_view key) {
  return parse_enum<E>(str_field(j, key));
}

template <class Tag>
std::vector<Id<Tag>> ids_or_empty(const nlohmann::json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) {
    throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be an array");
  }
  return it->get<std::vector<Id<Tag>>>();
}

const nlohmann::json& array_or_empty(const nlohmann::json& j, std::string_view key) {
  static const nlohmann::json empty = nlohmann::json::array();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return empty;
  if (!it->is_array()) {
    throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be an array");
  }
  return *it;
}

template <class T>
void put_opt(nlohmann::json& j, std::string_view key, const std::optional<T>& v) {
  if (v) j[std::string(key)] = *v;
}

// ---- entity codecs --------------------------------------------------------

nlohmann::json leaf_to_json(const ActionLeaf& l) {
  nlohmann::json j = {
      {"id", l.id},
      {"kind", to_string(l.kind)},
      {"observed_from", l.observed_from},
      {"observed_to", l.observed_to},
      {"description", l.description},
      {"evidence", l.evidence},
  };
  put_opt(j, "technique", l.technique);
  put_opt(j, "edge", l.edge);
  return j;
}

ActionLeaf leaf_from_json(const nlohmann::json& j, const TargetId& owner) {
  ActionLeaf l;
  l.id = field(j, "id").get<LeafId>();
  l.target = owner;
  if (auto t = opt_field<TargetId>(j, "target"); t && *t != owner) {
    throw Error(ErrorKind::ValidationError, "leaf " + l.id.str() + " names a different target");
  }
  l.kind = enum_field<LeafKind>(j, "kind");
  l.observed_from = field(j, "observed_from").get<Timestamp>();
  l.observed_to = field(j, "observed_to").get<Timestamp>();
  l.description = str_or(j, "description", "");
  l.technique = opt_str(j, "technique");
  l.evidence = normalized(ids_or_empty<EvidenceTag>(j, "evidence"));
  l.edge = opt_field<EdgeId>(j, "edge");
  if (l.edge && l.kind != LeafKind::Move) {
    throw Error(ErrorKind::ValidationError, "only move leaves may reference an edge");
  }
  return l;
}

nlohmann::json edge_to_json(const EdgeEvent& e) {
  return {
      {"id", e.id},
      {"kind", to_string(e.kind)},
      {"source", e.source ? e.source->str() : std::string(kAttackerSentinel)},
      {"dest", e.dest},
      {"at", e.at},
      {"vector", e.vector},
      {"evidence", e.evidence},
  };
}

EdgeEvent edge_from_json(const nlohmann::json& j) {
  EdgeEvent e;
  e.id = field(j, "id").get<EdgeId>();
  e.kind = enum_field<EdgeKind>(j, "kind");
  const std::string source = str_field(j, "source");
  if (source != kAttackerSentinel) e.source = TargetId(source);
  e.dest = field(j, "dest").get<TargetId>();
  e.at = field(j, "at").get<Timestamp>();
  e.vector = str_or(j, "vector", "");
  e.evidence = normalized(ids_or_empty<EvidenceTag>(j, "evidence"));
  return e;
}

nlohmann::json target_to_json(const TargetNode& t) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& l : t.leaves) leaves.push_back(leaf_to_json(l));
  return {
      {"id", t.id},
      {"label", t.label},
      {"first_seen", t.first_seen},
      {"leaves", std::move(leaves)},
      {"notes", t.notes},
  };
}

TargetNode target_from_json(const nlohmann::json& j) {
  TargetNode t;
  t.id = field(j, "id").get<TargetId>();
  t.label = str_field(j, "label");
  t.first_seen = field(j, "first_seen").get<Timestamp>();
  t.notes = str_or(j, "notes", "");
  for (const auto& l : array_or_empty(j, "leaves")) t.leaves.push_back(leaf_from_json(l, t.id));
  std::sort(t.leaves.begin(), t.leaves.end(),
            [](const ActionLeaf& a, const ActionLeaf& b) { return a.id < b.id; });
  return t;
}

nlohmann::json question_to_json(const Question& q) {
  nlohmann::json j = {
      {"id", q.id},
      {"scope", q.scope ? q.scope->str() : std::string("case")},
      {"text", q.text},
      {"state", to_string(q.state)},
  };
  put_opt(j, "spawned_from", q.spawned_from);
  put_opt(j, "answer", q.answer);
  return j;
}

Question question_from_json(const nlohmann::json& j) {
  Question q;
  q.id = field(j, "id").get<QuestionId>();
  const std::string scope = str_or(j, "scope", "case");
  if (scope != "case") q.scope = TargetId(scope);
  q.text = str_field(j, "text");
  q.state = enum_field<QuestionState>(j, "state");
  q.spawned_from = opt_field<HypothesisId>(j, "spawned_from");
  q.answer = opt_field<HypothesisId>(j, "answer");
  return q;
}

nlohmann::json step_to_json(const CollectionStep& s) {
  return {
      {"id", s.id},
      {"question", s.question},
      {"category", to_string(s.category)},
      {"source_description", s.source_description},
      {"collected", s.collected},
      {"status", to_string(s.status)},
  };
}

CollectionStep step_from_json(const nlohmann::json& j) {
  CollectionStep s;
  s.id = field(j, "id").get<StepId>();
  s.question = field(j, "question").get<QuestionId>();
  s.category = enum_field<DataSourceCategory>(j, "category");
  s.source_description = str_or(j, "source_description", "");
  s.collected = normalized(ids_or_empty<EvidenceTag>(j, "collected"));
  s.status = enum_field<StepStatus>(j, "status");
  return s;
}

nlohmann::json check_to_json(const VerificationCheck& c) {
  return {
      {"id", c.id},
      {"description", c.description},
      {"outcome", to_string(c.outcome)},
      {"evidence", c.evidence},
      {"at", c.at},
      {"actor", c.actor},
  };
}

VerificationCheck check_from_json(const nlohmann::json& j) {
  VerificationCheck c;
  c.id = field(j, "id").get<CheckId>();
  c.description = str_or(j, "description", "");
  c.outcome = enum_field<CheckOutcome>(j, "outcome");
  c.evidence = normalized(ids_or_empty<EvidenceTag>(j, "evidence"));
  c.at = field(j, "at").get<Timestamp>();
  c.actor = str_or(j, "actor", "");
  return c;
}

nlohmann::json hypothesis_to_json(const Hypothesis& h) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : h.checks) checks.push_back(check_to_json(c));
  return {
      {"id", h.id},
      {"question", h.question},
      {"statement", h.statement},
      {"supporting", h.supporting},
      {"state", to_string(h.state)},
      {"checks", std::move(checks)},
  };
}

Hypothesis hypothesis_from_json(const nlohmann::json& j) {
  Hypothesis h;
  h.id = field(j, "id").get<HypothesisId>();
  h.question = field(j, "question").get<QuestionId>();
  h.statement = str_field(j, "statement");
  h.supporting = normalized(ids_or_empty<EvidenceTag>(j, "supporting"));
  h.state = enum_field<HypothesisState>(j, "state");
  for (const auto& c : array_or_empty(j, "checks")) h.checks.push_back(check_from_json(c));
  return h;
}

nlohmann::json iteration_to_json(const IterationRecord& r) {
  nlohmann::json j = {{"seq", r.seq}, {"opened_at", r.opened_at}, {"trigger", r.trigger}};
  put_opt(j, "closed_at", r.closed_at);
  return j;
}

IterationRecord iteration_from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.seq = uint_field(j, "seq");
  r.opened_at = field(j, "opened_at").get<Timestamp>();
  r.closed_at = opt_field<Timestamp>(j, "closed_at");
  r.trigger = str_field(j, "trigger");
  return r;
}

nlohmann::json filter_to_json(const FilterRecord& f) {
  nlohmann::json j = {
      {"journal_seq", f.journal_seq},
      {"actor", f.actor},
      {"expression", f.expression},
      {"result", f.result},
  };
  put_opt(j, "question", f.question);
  return j;
}

FilterRecord filter_from_json(const nlohmann::json& j) {
  FilterRecord f;
  f.journal_seq = uint_field(j, "journal_seq");
  f.actor = str_or(j, "actor", "");
  f.question = opt_field<QuestionId>(j, "question");
  f.expression = field(j, "expression");
  f.result = normalized(ids_or_empty<EvidenceTag>(j, "result"));
  return f;
}

template <class K, class V, class Fn>
nlohmann::json map_values(const std::map<K, V>& m, Fn&& fn) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [_, v] : m) out.push_back(fn(v));
  return out;
}

template <class K, class V, class Fn>
void load_keyed(std::map<K, V>& out, const nlohmann::json& arr, Fn&& fn, std::string_view what) {
  for (const auto& item : arr) {
    V v = fn(item);
    auto key = v.id;
    if (!out.emplace(key, std::move(v)).second) {
      throw Error(ErrorKind::ValidationError,
                  "duplicate " + std::string(what) + " id " + key.str());
    }
  }
}

}  // namespace

#define FLOWER_ENUM_NAMES(Enum, table)                                                         \
  std::string_view to_string(Enum v) noexcept { return name_of(table, v); }                    \
  template <>                                                                                  \
  Enum parse_enum<Enum>(std::string_view text) {                                               \
    return value_of(table, text, #Enum);                                                       \
  }

FLOWER_ENUM_NAMES(LeafKind, kLeafNames)
FLOWER_ENUM_NAMES(EdgeKind, kEdgeNames)
FLOWER_ENUM_NAMES(CaseState, kCaseStateNames)
FLOWER_ENUM_NAMES(QuestionState, kQuestionStateNames)
FLOWER_ENUM_NAMES(DataSourceCategory, kCategoryNames)
FLOWER_ENUM_NAMES(StepStatus, kStepStatusNames)
FLOWER_ENUM_NAMES(HypothesisState, kHypothesisStateNames)
FLOWER_ENUM_NAMES(CheckOutcome, kOutcomeNames)
FLOWER_ENUM_NAMES(CustodyAction, kCustodyNames)

#undef FLOWER_ENUM_NAMES

std::size_t leaf_index(LeafKind kind) noexcept { return static_cast<std::size_t>(kind); }

const TargetNode* Case::find_target(const TargetId& tid) const {
  auto it = targets.find(tid);
  return it == targets.end() ? nullptr : &it->second;
}

const ActionLeaf* Case::find_leaf(const LeafId& lid) const {
  for (const auto& [_, t] : targets) {
    for (const auto& l : t.leaves) {
      if (l.id == lid) return &l;
    }
  }
  return nullptr;
}

std::vector<const EdgeEvent*> Case::inbound_edges(const TargetId& tid) const {
  std::vector<const EdgeEvent*> out;
  for (const auto& [_, e] : edges) {
    if (e.dest == tid) out.push_back(&e);
  }
  return out;
}

std::optional<Timestamp> Case::earliest_inbound(const TargetId& tid) const {
  std::optional<Timestamp> best;
  for (const auto& [_, e] : edges) {
    if (e.dest == tid && (!best || e.at < *best)) best = e.at;
  }
  return best;
}

std::size_t Case::leaf_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : targets) n += t.leaves.size();
  return n;
}

nlohmann::json to_json(const ActionLeaf& leaf) { return leaf_to_json(leaf); }
nlohmann::json to_json(const EdgeEvent& edge) { return edge_to_json(edge); }
nlohmann::json to_json(const TargetNode& target) { return target_to_json(target); }
nlohmann::json to_json(const Question& question) { return question_to_json(question); }
nlohmann::json to_json(const CollectionStep& step) { return step_to_json(step); }
nlohmann::json to_json(const VerificationCheck& check) { return check_to_json(check); }
nlohmann::json to_json(const Hypothesis& hypothesis) { return hypothesis_to_json(hypothesis); }
nlohmann::json to_json(const IterationRecord& record) { return iteration_to_json(record); }
nlohmann::json to_json(const SignerKey& key) {
  return {{"key_id", key.key_id}, {"public_key", key.public_key}};
}

nlohmann::json to_json(const EvidenceItem& i) {
  nlohmann::json j = {
      {"id", i.id},
      {"content_hash", i.content_hash},
      {"size_bytes", i.size_bytes},
      {"category", to_string(i.category)},
      {"acquired_at", i.acquired_at},
      {"acquired_by", i.acquired_by},
      {"description", i.description},
      {"storage_path", i.storage_path},
  };
  put_opt(j, "source_target", i.source_target);
  put_opt(j, "collection_step", i.collection_step);
  return j;
}

EvidenceItem evidence_from_json(const nlohmann::json& j) {
  EvidenceItem i;
  i.id = field(j, "id").get<EvidenceId>();
  i.content_hash = str_field(j, "content_hash");
  if (!is_valid_id(i.id.str()) || i.content_hash.size() != 64) {
    throw Error(ErrorKind::ValidationError, "evidence " + i.id.str() + " has a malformed hash");
  }
  i.size_bytes = uint_field(j, "size_bytes");
  i.category = enum_field<DataSourceCategory>(j, "category");
  i.source_target = opt_field<TargetId>(j, "source_target");
  i.acquired_at = field(j, "acquired_at").get<Timestamp>();
  i.acquired_by = str_or(j, "acquired_by", "");
  i.description = str_or(j, "description", "");
  i.storage_path = str_or(j, "storage_path", "");
  i.collection_step = opt_field<StepId>(j, "collection_step");
  return i;
}

nlohmann::json to_json(const CustodyEntry& e) {
  return {
      {"seq", e.seq},
      {"evidence", e.evidence},
      {"action", to_string(e.action)},
      {"actor", e.actor},
      {"at", e.at},
      {"prev_hash", e.prev_hash},
      {"entry_hash", e.entry_hash},
      {"signature", e.signature},
      {"signer_key_id", e.signer_key_id},
  };
}

CustodyEntry custody_from_json(const nlohmann::json& j) {
  CustodyEntry e;
  e.seq = uint_field(j, "seq");
  e.evidence = field(j, "evidence").get<EvidenceId>();
  e.action = enum_field<CustodyAction>(j, "action");
  e.actor = str_field(j, "actor");
  e.at = field(j, "at").get<Timestamp>();
  e.prev_hash = str_field(j, "prev_hash");
  e.entry_hash = str_field(j, "entry_hash");
  e.signature = str_field(j, "signature");
  e.signer_key_id = str_field(j, "signer_key_id");
  return e;
}

nlohmann::json case_to_json(const Case& c) {
  nlohmann::json attacker = {{"label", c.attacker.label}};
  put_opt(attacker, "info_gathering_notes", c.attacker.info_gathering_notes);

  nlohmann::json custody = nlohmann::json::array();
  for (const auto& e : c.custody) custody.push_back(to_json(e));
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& r : c.iterations) iterations.push_back(iteration_to_json(r));
  nlohmann::json filters = nlohmann::json::array();
  for (const auto& f : c.filters) filters.push_back(filter_to_json(f));
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& [_, k] : c.signer_keys) {
    keys.push_back(to_json(k));
  }

  nlohmann::json j = {
      {"schema", kCaseSchema},
      {"id", c.id},
      {"name", c.name},
      {"opened_at", c.opened_at},
      {"opened_by", c.opened_by},
      {"state", to_string(c.state)},
      {"attacker", std::move(attacker)},
      {"targets", map_values(c.targets, target_to_json)},
      {"edges", map_values(c.edges, edge_to_json)},
      {"questions", map_values(c.questions, question_to_json)},
      {"collection_steps", map_values(c.steps, step_to_json)},
      {"hypotheses", map_values(c.hypotheses, hypothesis_to_json)},
      {"evidence", map_values(c.evidence, [](const EvidenceItem& i) { return to_json(i); })},
      {"custody", std::move(custody)},
      {"iterations", std::move(iterations)},
      {"filters", std::move(filters)},
      {"signer_keys", std::move(keys)},
  };
  put_opt(j, "closed_at", c.closed_at);
  put_opt(j, "closed_by", c.closed_by);
  return j;
}

Case case_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::UnsupportedSchema, "case document is not an object");
  auto schema = j.find("schema");
  if (schema == j.end()) throw Error(ErrorKind::UnsupportedSchema, "missing schema field");
  if (!schema->is_string() || schema->get<std::string>() != kCaseSchema) {
    throw Error(ErrorKind::UnsupportedSchema, "unsupported schema " + schema->dump());
  }
  try {
    Case c;
    c.id = field(j, "id").get<CaseId>();
    c.name = str_field(j, "name");
    c.opened_at = field(j, "opened_at").get<Timestamp>();
    c.opened_by = str_or(j, "opened_by", "");
    c.state = parse_enum<CaseState>(str_or(j, "state", "open"));
    c.closed_at = opt_field<Timestamp>(j, "closed_at");
    c.closed_by = opt_str(j, "closed_by");
    if (auto a = j.find("attacker"); a != j.end() && !a->is_null()) {
      c.attacker.label = str_or(*a, "label", "attacker");
      c.attacker.info_gathering_notes = opt_str(*a, "info_gathering_notes");
    }
    load_keyed(c.targets, array_or_empty(j, "targets"), target_from_json, "target");
    load_keyed(c.edges, array_or_empty(j, "edges"), edge_from_json, "edge");
    load_keyed(c.questions, array_or_empty(j, "questions"), question_from_json, "question");
    load_keyed(c.steps, array_or_empty(j, "collection_steps"), step_from_json, "collection step");
    load_keyed(c.hypotheses, array_or_empty(j, "hypotheses"), hypothesis_from_json, "hypothesis");
    load_keyed(c.evidence, array_or_empty(j, "evidence"), evidence_from_json, "evidence");
    for (const auto& e : array_or_empty(j, "custody")) c.custody.push_back(custody_from_json(e));
    for (const auto& r : array_or_empty(j, "iterations")) c.iterations.push_back(iteration_from_json(r));
    for (const auto& f : array_or_empty(j, "filters")) c.filters.push_back(filter_from_json(f));
    for (const auto& k : array_or_empty(j, "signer_keys")) {
      SignerKey key{str_field(k, "key_id"), str_field(k, "public_key")};
      c.signer_keys.emplace(key.key_id, std::move(key));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("malformed case document: ") + e.what());
  }
}

}  // namespace flower
