#pragma once

#include "flower/journal.hpp"
#include "flower/session.hpp"
#include "flower/vault.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace flower {

// A directory of cases laid out as <root>/<case-id>/{journal.jsonl,
// journal.lock, vault/}. Writers hold the case lock around each mutation.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root, SessionOptions options = {});

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path case_dir(const CaseId& id) const;
  bool exists(const CaseId& id) const;
  // Case ids with a journal, sorted.
  std::vector<CaseId> cases() const;

  Session create(const std::string& name, Timestamp opened_at, const std::string& actor,
                 std::optional<std::string> attacker_label = std::nullopt);
  // Throws Error{NotFound} for an unknown case.
  Session open(const CaseId& id) const;
  std::unique_ptr<JournalLock> lock(const CaseId& id) const;

  SessionOptions& options() noexcept { return options_; }

 private:
  std::filesystem::path root_;
  SessionOptions options_;
};

}  // namespace flower
