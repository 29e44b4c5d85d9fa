#pragma once

#include "flower/chain.hpp"
#include "flower/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flower {

inline constexpr std::string_view kJournalFile = "journal.jsonl";
inline constexpr std::string_view kJournalLock = "journal.lock";
inline constexpr std::string_view kDigestFile = "state.sha256";

// One documented case mutation. `at` is the recording time; domain times
// live in the payload.
struct JournalEvent {
  std::uint64_t seq = 0;
  Timestamp at;
  std::string actor;
  std::string kind;
  nlohmann::json payload;
  std::string prev_hash;
  std::string hash;

  bool operator==(const JournalEvent&) const = default;
};

nlohmann::json to_json(const JournalEvent& e);
JournalEvent journal_event_from_json(const nlohmann::json& j);
// SHA-256 of the canonical event without its "hash" member.
std::string journal_event_hash(const JournalEvent& e);
// One JSON Lines record, without the trailing LF.
std::string to_line(const JournalEvent& e);

// Append-only, hash-linked event log; optionally backed by a JSON Lines
// file that is written before any mutation is acknowledged.
class Journal {
 public:
  Journal() = default;

  // Loads and verifies an existing file (or starts an empty one).
  // Throws Error{JournalTampered} if the chain does not verify.
  static Journal open(const std::filesystem::path& file);
  static Journal from_events(std::vector<JournalEvent> events);

  // Builds the next event without persisting it. Throws
  // Error{UnknownEventKind} for kinds the reducer does not know.
  JournalEvent prepare(std::string kind, nlohmann::json payload, std::string actor,
                       Timestamp at) const;
  // Write-ahead: the line is flushed to disk before the event is recorded
  // in memory. Throws Error{StorageError}; on failure nothing is appended.
  void persist(const JournalEvent& event);
  JournalEvent append(std::string kind, nlohmann::json payload, std::string actor, Timestamp at);

  // Reads events appended to the backing file by other writers. Returns the
  // number of new events.
  std::size_t refresh();

  const std::vector<JournalEvent>& events() const noexcept { return events_; }
  std::uint64_t last_seq() const noexcept { return events_.empty() ? 0 : events_.back().seq; }
  const std::optional<std::filesystem::path>& file() const noexcept { return file_; }
  std::string to_jsonl() const;

 private:
  std::vector<JournalEvent> events_;
  std::optional<std::filesystem::path> file_;
};

ChainResult verify_journal(std::span<const JournalEvent> events);
// Verifies raw JSON Lines; an unparseable line breaks at its position.
ChainResult verify_journal_lines(std::span<const std::string> lines);
// complete_only drops a trailing line that has no newline yet (a write in
// progress by another process).
std::vector<std::string> read_journal_lines(const std::filesystem::path& file, bool complete_only = false);

// Deterministic materialization. Throws Error{NoGenesis} for an empty
// journal, Error{JournalTampered} when the chain is broken.
Case replay(std::span<const JournalEvent> events);

// SHA-256 of the canonical case serialization.
std::string state_digest(const Case& c);

// Exclusive advisory lock on <dir>/journal.lock, held for the object's
// lifetime.
class JournalLock {
 public:
  explicit JournalLock(const std::filesystem::path& case_dir);
  JournalLock(const JournalLock&) = delete;
  JournalLock& operator=(const JournalLock&) = delete;
  ~JournalLock();

 private:
  int fd_ = -1;
};

}  // namespace flower
