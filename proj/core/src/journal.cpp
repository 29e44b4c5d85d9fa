#include "flower/journal.hpp"

#include "flower/canonical.hpp"
#include "flower/crypto.hpp"
#include "flower/error.hpp"
#include "flower/reducer.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flower {
namespace fs = std::filesystem;

namespace {

ChainResult check_link(const JournalEvent& e, std::uint64_t pos, const std::string& expected_prev) {
  if (e.prev_hash != expected_prev || e.seq != pos) {
    return {ChainBreak{pos, BreakReason::HashLink, "event does not link to its predecessor"}};
  }
  if (journal_event_hash(e) != e.hash) {
    return {ChainBreak{pos, BreakReason::EntryHash, "event content does not match its hash"}};
  }
  return {};
}

std::optional<JournalEvent> parse_line(const std::string& line) {
  try {
    return journal_event_from_json(nlohmann::json::parse(line));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

nlohmann::json to_json(const JournalEvent& e) {
  return {
      {"seq", e.seq},         {"at", e.at},     {"actor", e.actor},
      {"kind", e.kind},       {"payload", e.payload},
      {"prev_hash", e.prev_hash}, {"hash", e.hash},
  };
}

JournalEvent journal_event_from_json(const nlohmann::json& j) {
  JournalEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.at = j.at("at").get<Timestamp>();
  e.actor = j.at("actor").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  e.payload = j.at("payload");
  e.prev_hash = j.at("prev_hash").get<std::string>();
  e.hash = j.at("hash").get<std::string>();
  return e;
}

std::string journal_event_hash(const JournalEvent& e) {
  nlohmann::json j = to_json(e);
  j.erase("hash");
  return sha256_hex(canonical_json(j));
}

std::string to_line(const JournalEvent& e) { return canonical_json(to_json(e)); }

Journal Journal::open(const fs::path& file) {
  Journal j;
  j.file_ = file;
  std::error_code ec;
  if (!fs::exists(file, ec)) return j;
  const auto lines = read_journal_lines(file);
  if (auto r = verify_journal_lines(lines); !r.ok()) {
    throw Error(ErrorKind::JournalTampered,
                "journal breaks at seq " + std::to_string(r.first_break->seq) + ": " +
                    r.first_break->message,
                {{"seq", r.first_break->seq}});
  }
  for (const auto& line : lines) j.events_.push_back(*parse_line(line));
  return j;
}

Journal Journal::from_events(std::vector<JournalEvent> events) {
  Journal j;
  j.events_ = std::move(events);
  return j;
}

JournalEvent Journal::prepare(std::string kind, nlohmann::json payload, std::string actor,
                              Timestamp at) const {
  if (!is_known_event_kind(kind)) {
    throw Error(ErrorKind::UnknownEventKind, "unknown journal event kind '" + kind + "'");
  }
  JournalEvent e;
  e.seq = last_seq() + 1;
  e.at = at;
  e.actor = std::move(actor);
  e.kind = std::move(kind);
  e.payload = std::move(payload);
  e.prev_hash = events_.empty() ? std::string(kZeroHash) : events_.back().hash;
  e.hash = journal_event_hash(e);
  return e;
}

void Journal::persist(const JournalEvent& event) {
  if (event.seq != last_seq() + 1 ||
      event.prev_hash != (events_.empty() ? std::string(kZeroHash) : events_.back().hash)) {
    throw Error(ErrorKind::StorageError, "event does not extend the journal head");
  }
  if (file_) {
    const std::string line = to_line(event) + "\n";
    const int fd = ::open(file_->c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
      throw Error(ErrorKind::StorageError, "cannot open journal: " + std::string(std::strerror(errno)));
    }
    struct stat st {};
    ::fstat(fd, &st);
    std::size_t written = 0;
    bool ok = true;
    while (written < line.size()) {
      const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        ok = false;
        break;
      }
      written += static_cast<std::size_t>(n);
    }
    if (ok && ::fsync(fd) != 0) ok = false;
    if (!ok) {
      const std::string why = std::strerror(errno);
      if (::ftruncate(fd, st.st_size) != 0) {
        // Leave the partial line; verify_journal will flag it.
      }
      ::close(fd);
      throw Error(ErrorKind::StorageError, "journal write failed: " + why);
    }
    ::close(fd);
  }
  events_.push_back(event);
}

JournalEvent Journal::append(std::string kind, nlohmann::json payload, std::string actor, Timestamp at) {
  JournalEvent e = prepare(std::move(kind), std::move(payload), std::move(actor), at);
  persist(e);
  return e;
}

std::size_t Journal::refresh() {
  if (!file_) return 0;
  std::error_code ec;
  if (!fs::exists(*file_, ec)) return 0;
  const auto lines = read_journal_lines(*file_, true);
  std::size_t added = 0;
  for (std::size_t i = events_.size(); i < lines.size(); ++i) {
    auto e = parse_line(lines[i]);
    const std::string prev = events_.empty() ? std::string(kZeroHash) : events_.back().hash;
    if (!e || !check_link(*e, i + 1, prev).ok()) {
      throw Error(ErrorKind::JournalTampered, "journal breaks at seq " + std::to_string(i + 1),
                  {{"seq", i + 1}});
    }
    events_.push_back(std::move(*e));
    ++added;
  }
  return added;
}

std::string Journal::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) out += to_line(e) + "\n";
  return out;
}

ChainResult verify_journal(std::span<const JournalEvent> events) {
  std::string prev(kZeroHash);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (auto r = check_link(events[i], i + 1, prev); !r.ok()) return r;
    prev = events[i].hash;
  }
  return {};
}

ChainResult verify_journal_lines(std::span<const std::string> lines) {
  std::string prev(kZeroHash);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto e = parse_line(lines[i]);
    if (!e) return {ChainBreak{i + 1, BreakReason::EntryHash, "line is not a journal event"}};
    if (auto r = check_link(*e, i + 1, prev); !r.ok()) return r;
    // The stored line must be the canonical rendering of the event.
    if (to_line(*e) != lines[i]) {
      return {ChainBreak{i + 1, BreakReason::EntryHash, "line is not in canonical form"}};
    }
    prev = e->hash;
  }
  return {};
}

std::vector<std::string> read_journal_lines(const fs::path& file, bool complete_only) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string::npos) {
      if (!complete_only) lines.push_back(text.substr(start));
      break;
    }
    if (end > start) lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

Case replay(std::span<const JournalEvent> events) {
  if (events.empty()) throw Error(ErrorKind::NoGenesis, "journal is empty");
  if (events.front().kind != event::kCreateCase) {
    throw Error(ErrorKind::NoGenesis, "journal does not start with create_case");
  }
  if (auto r = verify_journal(events); !r.ok()) {
    throw Error(ErrorKind::JournalTampered,
                "journal breaks at seq " + std::to_string(r.first_break->seq) + ": " +
                    r.first_break->message,
                {{"seq", r.first_break->seq}});
  }
  Case c;
  for (const auto& e : events) {
    try {
      apply_event(c, e);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::UnknownEventKind) throw;
      throw Error(ErrorKind::JournalTampered,
                  "event " + std::to_string(e.seq) + " does not apply: " + err.what(),
                  {{"seq", e.seq}});
    }
  }
  return c;
}

std::string state_digest(const Case& c) { return sha256_hex(canonical_json(case_to_json(c))); }

JournalLock::JournalLock(const fs::path& case_dir) {
  std::error_code ec;
  fs::create_directories(case_dir, ec);
  const fs::path p = case_dir / kJournalLock;
  fd_ = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
    if (fd_ >= 0) ::close(fd_);
    throw Error(ErrorKind::StorageError, "cannot lock " + p.string());
  }
}

JournalLock::~JournalLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace flower
