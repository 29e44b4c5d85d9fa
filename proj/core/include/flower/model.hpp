#pragma once

#include "flower/id.hpp"
#include "flower/timestamp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flower {

inline constexpr std::string_view kCaseSchema = "flowercase/1";
// Wire value of an edge source that is the attacker rather than a target.
inline constexpr std::string_view kAttackerSentinel = "attacker";

// The six leaves of a target flower.
enum class LeafKind {
  EscalatePrivileges,
  MaintainAccess,
  InformationGathering,
  ActionsOnObjective,
  CoverTracks,
  Move,
};

inline constexpr std::array<LeafKind, 6> kAllLeafKinds = {
    LeafKind::EscalatePrivileges, LeafKind::MaintainAccess, LeafKind::InformationGathering,
    LeafKind::ActionsOnObjective, LeafKind::CoverTracks,    LeafKind::Move,
};

enum class EdgeKind { InitialCompromise, Move };
enum class CaseState { Open, Closed };
enum class QuestionState { Open, Collecting, Hypothesizing, Answered, Withdrawn };
enum class DataSourceCategory { Host, Network, Misc };
enum class StepStatus { Planned, Done };
enum class HypothesisState { Proposed, Verified, Refuted };
enum class CheckOutcome { Verified, Refuted };
enum class CustodyAction { Ingested, Accessed, Exported, Verified };

std::string_view to_string(LeafKind v) noexcept;
std::string_view to_string(EdgeKind v) noexcept;
std::string_view to_string(CaseState v) noexcept;
std::string_view to_string(QuestionState v) noexcept;
std::string_view to_string(DataSourceCategory v) noexcept;
std::string_view to_string(StepStatus v) noexcept;
std::string_view to_string(HypothesisState v) noexcept;
std::string_view to_string(CheckOutcome v) noexcept;
std::string_view to_string(CustodyAction v) noexcept;

// Parse the snake_case wire form; unknown strings throw Error{ValidationError}.
template <class E>
E parse_enum(std::string_view text);

template <> LeafKind parse_enum<LeafKind>(std::string_view);
template <> EdgeKind parse_enum<EdgeKind>(std::string_view);
template <> CaseState parse_enum<CaseState>(std::string_view);
template <> QuestionState parse_enum<QuestionState>(std::string_view);
template <> DataSourceCategory parse_enum<DataSourceCategory>(std::string_view);
template <> StepStatus parse_enum<StepStatus>(std::string_view);
template <> HypothesisState parse_enum<HypothesisState>(std::string_view);
template <> CheckOutcome parse_enum<CheckOutcome>(std::string_view);
template <> CustodyAction parse_enum<CustodyAction>(std::string_view);

std::size_t leaf_index(LeafKind kind) noexcept;

struct AttackerNode {
  std::string label = "attacker";
  // Attacker-side "initial information gathering"; free text only.
  std::optional<std::string> info_gathering_notes;

  bool operator==(const AttackerNode&) const = default;
};

struct ActionLeaf {
  LeafId id;
  TargetId target;
  LeafKind kind = LeafKind::EscalatePrivileges;
  Timestamp observed_from;
  Timestamp observed_to;
  std::string description;
  std::optional<std::string> technique;
  std::vector<EvidenceId> evidence;
  // Set only for Move leaves: the outbound move edge this leaf faces.
  std::optional<EdgeId> edge;

  bool operator==(const ActionLeaf&) const = default;
};

struct EdgeEvent {
  EdgeId id;
  EdgeKind kind = EdgeKind::InitialCompromise;
  // nullopt is the attacker sentinel.
  std::optional<TargetId> source;
  TargetId dest;
  Timestamp at;
  std::string vector;
  std::vector<EvidenceId> evidence;

  bool from_attacker() const noexcept { return !source.has_value(); }
  bool operator==(const EdgeEvent&) const = default;
};

struct TargetNode {
  TargetId id;
  std::string label;
  Timestamp first_seen;
  std::vector<ActionLeaf> leaves;
  std::string notes;

  bool operator==(const TargetNode&) const = default;
};

struct Question {
  QuestionId id;
  // nullopt = case-wide.
  std::optional<TargetId> scope;
  std::string text;
  QuestionState state = QuestionState::Open;
  std::optional<HypothesisId> spawned_from;
  std::optional<HypothesisId> answer;

  bool operator==(const Question&) const = default;
};

struct CollectionStep {
  StepId id;
  QuestionId question;
  DataSourceCategory category = DataSourceCategory::Host;
  std::string source_description;
  std::vector<EvidenceId> collected;
  StepStatus status = StepStatus::Planned;

  bool operator==(const CollectionStep&) const = default;
};

struct VerificationCheck {
  CheckId id;
  std::string description;
  CheckOutcome outcome = CheckOutcome::Verified;
  std::vector<EvidenceId> evidence;
  Timestamp at;
  std::string actor;

  bool operator==(const VerificationCheck&) const = default;
};

struct Hypothesis {
  HypothesisId id;
  QuestionId question;
  std::string statement;
  std::vector<EvidenceId> supporting;
  HypothesisState state = HypothesisState::Proposed;
  std::vector<VerificationCheck> checks;

  bool operator==(const Hypothesis&) const = default;
};

struct IterationRecord {
  std::uint64_t seq = 0;
  Timestamp opened_at;
  std::optional<Timestamp> closed_at;
  std::string trigger;

  bool operator==(const IterationRecord&) const = default;
};

// A journaled filter evaluation, kept for the audit report.
struct FilterRecord {
  std::uint64_t journal_seq = 0;
  std::string actor;
  std::optional<QuestionId> question;
  nlohmann::json expression;
  std::vector<EvidenceId> result;

  bool operator==(const FilterRecord&) const = default;
};

struct EvidenceItem {
  EvidenceId id;
  std::string content_hash;
  std::uint64_t size_bytes = 0;
  DataSourceCategory category = DataSourceCategory::Host;
  std::optional<TargetId> source_target;
  Timestamp acquired_at;
  std::string acquired_by;
  std::string description;
  std::string storage_path;
  // The planned collection step this item was ingested against.
  std::optional<StepId> collection_step;

  bool operator==(const EvidenceItem&) const = default;
};

struct CustodyEntry {
  std::uint64_t seq = 0;
  EvidenceId evidence;
  CustodyAction action = CustodyAction::Ingested;
  std::string actor;
  Timestamp at;
  std::string prev_hash;
  std::string entry_hash;
  std::string signature;
  std::string signer_key_id;

  bool operator==(const CustodyEntry&) const = default;
};

struct SignerKey {
  std::string key_id;
  std::string public_key;

  bool operator==(const SignerKey&) const = default;
};

// Root aggregate. Always a materialization of a journal; containers are
// keyed by id so iteration order is creation order.
struct Case {
  CaseId id;
  std::string name;
  Timestamp opened_at;
  std::string opened_by;
  CaseState state = CaseState::Open;
  std::optional<Timestamp> closed_at;
  std::optional<std::string> closed_by;
  AttackerNode attacker;
  std::map<TargetId, TargetNode> targets;
  std::map<EdgeId, EdgeEvent> edges;
  std::map<QuestionId, Question> questions;
  std::map<StepId, CollectionStep> steps;
  std::map<HypothesisId, Hypothesis> hypotheses;
  std::map<EvidenceId, EvidenceItem> evidence;
  std::vector<CustodyEntry> custody;
  std::vector<IterationRecord> iterations;
  std::vector<FilterRecord> filters;
  std::map<std::string, SignerKey> signer_keys;

  bool operator==(const Case&) const = default;

  const TargetNode* find_target(const TargetId& id) const;
  const ActionLeaf* find_leaf(const LeafId& id) const;
  std::vector<const EdgeEvent*> inbound_edges(const TargetId& id) const;
  std::optional<Timestamp> earliest_inbound(const TargetId& id) const;
  std::size_t leaf_count() const;
};

// Sort and deduplicate an id list into canonical order.
template <class Tag>
std::vector<Id<Tag>> normalized(std::vector<Id<Tag>> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Full case in canonical wire form, including the "schema" field.
nlohmann::json case_to_json(const Case& c);
// Throws Error{UnsupportedSchema} when the schema field is missing or
// unknown, Error{ValidationError} for malformed members.
Case case_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ActionLeaf& leaf);
nlohmann::json to_json(const EdgeEvent& edge);
nlohmann::json to_json(const TargetNode& target);
nlohmann::json to_json(const Question& question);
nlohmann::json to_json(const CollectionStep& step);
nlohmann::json to_json(const VerificationCheck& check);
nlohmann::json to_json(const Hypothesis& hypothesis);
nlohmann::json to_json(const IterationRecord& record);
nlohmann::json to_json(const SignerKey& key);
nlohmann::json to_json(const EvidenceItem& item);
EvidenceItem evidence_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CustodyEntry& entry);
CustodyEntry custody_from_json(const nlohmann::json& j);

}  // namespace flower
