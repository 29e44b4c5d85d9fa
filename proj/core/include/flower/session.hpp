#pragma once

#include "flower/closure.hpp"
#include "flower/crypto.hpp"
#include "flower/filter.hpp"
#include "flower/id.hpp"
#include "flower/journal.hpp"
#include "flower/model.hpp"
#include "flower/vault.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flower {

struct SessionOptions {
  // Recording clock for journal events, custody entries and id time.
  Clock clock = [] { return Timestamp::now(); };
  IdGenerator ids;
  // Runs after an event is persisted and before it is applied in memory.
  // Tests throw from here to simulate a crash between the two.
  std::function<void(const JournalEvent&)> after_persist;
};

struct EvidenceMetadata {
  StepId step;
  // Defaults to the category of the collection step.
  std::optional<DataSourceCategory> category;
  std::optional<TargetId> source_target;
  std::string description;
  // Defaults to the recording clock.
  std::optional<Timestamp> acquired_at;
};

// One live case: a journal, the vault blobs, and the state materialized
// from the journal. Every mutation journals first, then applies; state is
// therefore always replay(journal). Single writer; not thread-safe.
class Session {
 public:
  static Session create(Journal journal, std::shared_ptr<BlobStore> blobs, const std::string& name,
                        Timestamp opened_at, const std::string& actor, SessionOptions options = {},
                        std::optional<std::string> attacker_label = std::nullopt);
  static Session resume(Journal journal, std::shared_ptr<BlobStore> blobs, SessionOptions options = {});

  const Case& state() const noexcept { return state_; }
  const Journal& journal() const noexcept { return journal_; }
  const BlobStore& blobs() const noexcept { return *blobs_; }
  std::uint64_t last_seq() const noexcept { return journal_.last_seq(); }

  // Applies events appended to the journal file by another writer.
  std::size_t sync();

  // ---- flower model
  void annotate_attacker(const std::string& label, std::optional<std::string> info_gathering_notes,
                         const std::string& actor);
  TargetNode add_target(const std::string& label, Timestamp first_seen, const std::string& actor,
                        const std::string& notes = "");
  EdgeEvent record_initial_compromise(TargetId dest, Timestamp at, const std::string& vector,
                                      std::vector<EvidenceId> evidence, const std::string& actor);
  std::pair<EdgeEvent, ActionLeaf> record_move(TargetId source, TargetId dest, Timestamp at,
                                               const std::string& technique,
                                               std::vector<EvidenceId> evidence, const std::string& actor);
  ActionLeaf record_action(TargetId target, LeafKind kind, Timestamp from, Timestamp to,
                           const std::string& description, std::vector<EvidenceId> evidence,
                           const std::string& actor, std::optional<std::string> technique = std::nullopt);

  // ---- investigation
  Question pose_question(std::optional<TargetId> scope, const std::string& text, const std::string& actor,
                         std::optional<HypothesisId> spawned_from = std::nullopt);
  Question withdraw_question(QuestionId question, const std::string& actor);
  CollectionStep plan_collection(QuestionId question, DataSourceCategory category,
                                 const std::string& source_description, const std::string& actor);
  CollectionStep attach_collected(StepId step, std::vector<EvidenceId> evidence,
                                  const std::string& actor);
  // Evaluates and journals the filter; on a closed case only evaluates.
  std::vector<EvidenceId> run_filter(const FilterSpec& spec, std::optional<QuestionId> question,
                                     const std::string& actor);
  Hypothesis propose_hypothesis(QuestionId question, const std::string& statement,
                                std::vector<EvidenceId> supporting, const std::string& actor);
  VerificationCheck record_check(HypothesisId hypothesis, const std::string& description,
                                 CheckOutcome outcome, std::vector<EvidenceId> evidence,
                                 const std::string& actor, Timestamp at);
  Question answer_question(QuestionId question, HypothesisId hypothesis,
                           const std::string& actor);
  IterationRecord open_iteration(const std::string& trigger, Timestamp at, const std::string& actor);
  ClosureReport closure_status() const;
  // Throws Error{ClosureBlocked} carrying the closure report.
  void close_case(const std::string& actor, Timestamp at);

  // ---- evidence vault
  // Registers the key's public half if it is not yet known.
  SignerKey register_key(const SigningKey& key, const std::string& actor);
  std::pair<EvidenceItem, CustodyEntry> ingest_evidence(std::span<const std::uint8_t> bytes,
                                                        const EvidenceMetadata& metadata,
                                                        const std::string& actor, const SigningKey& key);
  // Appends a Verified custody entry whatever the outcome. A missing blob is
  // recorded and then reported as Error{BlobMissing}.
  VerificationResult verify_item(EvidenceId id, const std::string& actor, const SigningKey& key);
  // Reads the blob and appends an Exported (or Accessed) custody entry.
  Bytes export_evidence(EvidenceId id, const std::string& actor, const SigningKey& key);
  Bytes access_evidence(EvidenceId id, const std::string& actor, const SigningKey& key);
  ChainResult verify_chain() const;

 private:
  Session(Journal journal, std::shared_ptr<BlobStore> blobs, SessionOptions options);

  const JournalEvent& commit(std::string_view kind, nlohmann::json payload, const std::string& actor);
  std::string next_id();
  Bytes read_for_custody(EvidenceId id, CustodyAction action, std::string_view kind,
                         const std::string& actor, const SigningKey& key);
  void observe_ids(const Case& c);

  Journal journal_;
  std::shared_ptr<BlobStore> blobs_;
  SessionOptions options_;
  Case state_;
};

}  // namespace flower
