#pragma once

#include "flower/crypto.hpp"
#include "flower/session.hpp"
#include "flower/vault.hpp"

#include <array>
#include <filesystem>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace flower::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Timestamp ts(const char* text) { return Timestamp::parse(text); }

inline SigningKey fixed_key(std::uint8_t fill = 7) {
  std::array<std::uint8_t, 32> seed{};
  seed.fill(fill);
  return SigningKey::from_seed(seed);
}

// Recording clock ticking one second per call from 2024-06-01, plus
// seeded ids: two sessions built alike journal identical bytes.
SessionOptions fixed_options(std::uint64_t seed = 1);

// A closable two-target case of about thirty operations:
// attacker -> web-01 -> db-02, three questions (one case-wide), one
// refuted hypothesis.
struct ScriptedCase {
  std::shared_ptr<MemoryBlobStore> blobs = std::make_shared<MemoryBlobStore>();
  SigningKey key = fixed_key();
  std::optional<Session> session;
  TargetId web, db;
  EdgeId compromise, move;
  QuestionId q_entry, q_move, q_exfil;
  StepId s_entry, s_move, s_exfil;
  EvidenceId ev_auth, ev_flow, ev_proxy;
  HypothesisId h_entry, h_move, h_exfil, h_dns;

  Session& s() { return *session; }
};

// With answer=false the questions stay open and closure is blocked.
ScriptedCase build_scripted_case(bool answer = true, std::uint64_t seed = 1);

}  // namespace flower::testing
