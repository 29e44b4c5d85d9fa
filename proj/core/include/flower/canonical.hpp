#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace flower {

// Canonical JSON byte form: UTF-8, keys sorted, no insignificant
// whitespace. nlohmann::json keeps object keys in a std::map so sorting is
// structural; invalid UTF-8 is rejected rather than replaced.
std::string canonical_json(const nlohmann::json& value);

}  // namespace flower
