#include "flower/chain.hpp"

namespace flower {

std::string_view to_string(BreakReason r) noexcept {
  switch (r) {
    case BreakReason::HashLink: return "HashLink";
    case BreakReason::EntryHash: return "EntryHash";
    case BreakReason::Signature: return "Signature";
  }
  return "?";
}

nlohmann::json ChainResult::to_json() const {
  if (ok()) return {{"status", "ok"}};
  return {{"status", "broken"},
          {"seq", first_break->seq},
          {"reason", std::string(to_string(first_break->reason))},
          {"message", first_break->message}};
}

}  // namespace flower
