#include "flower/workspace.hpp"

#include "flower/error.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>

namespace flower {
namespace fs = std::filesystem;

Workspace::Workspace(fs::path root, SessionOptions options)
    : root_(std::move(root)), options_(std::move(options)) {}

fs::path Workspace::case_dir(const CaseId& id) const { return root_ / id.str(); }

bool Workspace::exists(const CaseId& id) const {
  std::error_code ec;
  return fs::is_regular_file(case_dir(id) / kJournalFile, ec);
}

std::vector<CaseId> Workspace::cases() const {
  std::vector<CaseId> out;
  std::error_code ec;
  fs::directory_iterator it(root_, ec);
  if (ec) return out;
  for (const auto& entry : it) {
    const std::string name = entry.path().filename().string();
    if (!is_valid_id(name)) continue;
    if (fs::is_regular_file(entry.path() / kJournalFile, ec)) out.emplace_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Session Workspace::create(const std::string& name, Timestamp opened_at, const std::string& actor,
                          std::optional<std::string> attacker_label) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorKind::StorageError, "cannot create " + root_.string() + ": " + ec.message());
  const fs::path staging =
      root_ / (".staging-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(staging, ec);

  CaseId id;
  {
    JournalLock guard(staging);
    auto session = Session::create(Journal::open(staging / kJournalFile),
                                   std::make_shared<FileBlobStore>(staging / "vault"), name, opened_at, actor,
                                   options_, std::move(attacker_label));
    id = session.state().id;
    options_.ids.observe(id.str());
  }
  fs::rename(staging, case_dir(id), ec);
  if (ec) {
    fs::remove_all(staging);
    throw Error(ErrorKind::StorageError, "cannot place case directory: " + ec.message());
  }
  return open(id);
}

Session Workspace::open(const CaseId& id) const {
  if (!exists(id)) throw Error(ErrorKind::NotFound, "no such case: " + id.str(), {{"id", id.str()}});
  const fs::path dir = case_dir(id);
  return Session::resume(Journal::open(dir / kJournalFile), std::make_shared<FileBlobStore>(dir / "vault"), options_);
}

std::unique_ptr<JournalLock> Workspace::lock(const CaseId& id) const {
  if (!exists(id)) throw Error(ErrorKind::NotFound, "no such case: " + id.str(), {{"id", id.str()}});
  return std::make_unique<JournalLock>(case_dir(id));
}

}  // namespace flower
