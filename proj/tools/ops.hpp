#pragma once

#include "flower/crypto.hpp"
#include "flower/session.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flower::ops {

struct Context {
  std::string actor;
  // Required by custody operations only.
  const SigningKey* key = nullptr;
  // Default for optional domain timestamps (check time, close time).
  Clock clock = [] { return Timestamp::now(); };
};

// Mutation names accepted by run(), in a stable order.
const std::vector<std::string_view>& names();

// Executes one named mutation with JSON parameters (field names as in the
// case JSON) and returns the affected entity plus the new journal "seq".
// Throws Error{ValidationError} for missing or malformed parameters.
nlohmann::json run(Session& session, std::string_view op, const nlohmann::json& params,
                   const Context& ctx);

// params: step, description, category?, source_target?, acquired_at?
nlohmann::json ingest(Session& session, std::span<const std::uint8_t> bytes, const nlohmann::json& params,
                      const Context& ctx);

}  // namespace flower::ops
