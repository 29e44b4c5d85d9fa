#pragma once

#include "flower/session.hpp"
#include "flower/timestamp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flower::cli {

// Process environment consulted by the CLI. Flags override these.
struct Env {
  std::filesystem::path home = "cases";      // FLOWER_HOME
  std::optional<std::string> case_id;        // FLOWER_CASE
  std::string actor = "investigator";        // FLOWER_ACTOR
  std::optional<std::filesystem::path> key;  // FLOWER_KEY
  std::optional<Timestamp> now;              // FLOWER_NOW, freezes the recording clock
  std::optional<std::uint64_t> id_seed;      // FLOWER_ID_SEED, reproducible ids

  static Env from_process();
};

SessionOptions session_options(const Env& env);

// Exit codes: 0 success, 1 domain error (one JSON object on `err`),
// 2 usage error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                 const Env& env = Env::from_process());

}  // namespace flower::cli
