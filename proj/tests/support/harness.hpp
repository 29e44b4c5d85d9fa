#pragma once

#include "rng.hpp"

#include "flower/crypto.hpp"
#include "flower/error.hpp"
#include "flower/session.hpp"
#include "flower/vault.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace flower::testing {

inline constexpr std::int64_t kDomainEpoch = 1704067200;     // 2024-01-01T00:00:00Z
inline constexpr std::int64_t kRecordingEpoch = 1717200000;  // 2024-06-01T00:00:00Z

struct OpOutcome {
  std::string op;
  bool ok = false;
  std::optional<ErrorKind> error;
  std::string detail;
};

struct DriverOptions {
  std::size_t max_targets = 8;
  // Share of ops built with a deliberately bad argument.
  double invalid_rate = 0.15;
  std::function<void(const JournalEvent&)> after_persist;
};

// Drives one in-memory case with random but reproducible operations.
class CaseDriver {
 public:
  explicit CaseDriver(std::uint64_t seed, DriverOptions options = {});

  // One random operation, valid or not.
  OpOutcome step();
  // One operation towards closure; returns op "done" once the case is closed.
  OpOutcome resolve_step();
  // resolve_step until closed or `budget` ops are spent.
  bool resolve(std::size_t budget = 400);

  Session& session() { return *session_; }
  const Case& state() const { return session_->state(); }
  MemoryBlobStore& blobs() { return *blobs_; }
  std::shared_ptr<MemoryBlobStore> blob_store() { return blobs_; }
  Rng& rng() { return rng_; }
  const SigningKey& key() const { return key_; }
  // Same clock and seeded ids, for resuming from the journal.
  SessionOptions session_options() const;
  std::vector<nlohmann::json> events_json() const;

 private:
  template <class F>
  OpOutcome attempt(const std::string& op, F&& f);
  Timestamp domain_time();
  std::string actor();

  OpOutcome op_add_target();
  OpOutcome op_compromise();
  OpOutcome op_move();
  OpOutcome op_action();
  OpOutcome op_pose();
  OpOutcome op_withdraw();
  OpOutcome op_plan();
  OpOutcome op_ingest();
  OpOutcome op_attach();
  OpOutcome op_propose();
  OpOutcome op_check();
  OpOutcome op_answer();
  OpOutcome op_filter();
  OpOutcome op_iteration();
  OpOutcome op_verify();
  OpOutcome op_close();

  OpOutcome ingest(const StepId& step);

  bool bad() { return rng_.chance(options_.invalid_rate); }
  template <class Tag>
  Id<Tag> some_id(const std::vector<Id<Tag>>& ids);

  std::vector<TargetId> targets() const;
  std::vector<QuestionId> questions() const;
  std::vector<StepId> steps() const;
  std::vector<HypothesisId> hypotheses() const;
  std::vector<EvidenceId> evidence() const;

  Rng rng_;
  DriverOptions options_;
  std::uint64_t id_seed_;
  std::shared_ptr<std::int64_t> clock_;
  std::shared_ptr<MemoryBlobStore> blobs_;
  SigningKey key_;
  std::optional<Session> session_;
};

// Random filter tree in wire form over the given targets.
nlohmann::json random_filter(Rng& rng, const std::vector<std::string>& targets, int depth);

// Random evidence items, directly in a Case (no session, no custody).
Case random_vault(Rng& rng, std::size_t max_items);

// Legal-transition check between two consecutive states. Returns one
// message per problem; `ok` is whether the op between them succeeded.
std::vector<std::string> transition_problems(const Case& before, const Case& after, bool ok);

std::vector<nlohmann::json> events_json(const Journal& journal);

}  // namespace flower::testing
