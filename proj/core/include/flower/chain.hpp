#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flower {

enum class BreakReason { HashLink, EntryHash, Signature };

std::string_view to_string(BreakReason r) noexcept;

struct ChainBreak {
  // 1-based position of the first entry that fails.
  std::uint64_t seq = 0;
  BreakReason reason = BreakReason::EntryHash;
  std::string message;
};

// Outcome of walking a hash chain (custody log or journal).
struct ChainResult {
  std::optional<ChainBreak> first_break;

  bool ok() const noexcept { return !first_break.has_value(); }
  nlohmann::json to_json() const;
};

}  // namespace flower
