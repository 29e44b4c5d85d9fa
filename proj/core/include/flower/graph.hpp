#pragma once

#include "flower/model.hpp"

#include <string>
#include <vector>

namespace flower {

// Rule identifiers reported by validate_graph.
namespace rule {
inline constexpr std::string_view kUnresolvedOrigin = "UnresolvedOrigin";
inline constexpr std::string_view kUnreachable = "Unreachable";
inline constexpr std::string_view kTemporalViolation = "TemporalViolation";
inline constexpr std::string_view kSelfMove = "SelfMove";
inline constexpr std::string_view kInvalidEdgeSource = "InvalidEdgeSource";
inline constexpr std::string_view kDanglingTarget = "DanglingTarget";
inline constexpr std::string_view kDanglingEvidenceRef = "DanglingEvidenceRef";
inline constexpr std::string_view kInvalidInterval = "InvalidInterval";
inline constexpr std::string_view kUnpairedMoveLeaf = "UnpairedMoveLeaf";
inline constexpr std::string_view kUnpairedMoveEdge = "UnpairedMoveEdge";
}  // namespace rule

struct Violation {
  std::string rule;
  std::string entity;
  std::string message;

  auto operator<=>(const Violation&) const = default;
};

nlohmann::json to_json(const Violation& v);

// Checks every flower-model graph rule. Pure; never throws. The result is
// sorted by (entity, rule, message).
std::vector<Violation> validate_graph(const Case& c);

using AttackPath = std::vector<EdgeId>;

// All simple paths (no repeated target) from the attacker to `target`,
// ordered by length and then lexicographically by edge ids.
// Throws Error{NotFound} for an unknown target.
std::vector<AttackPath> attack_chains(const Case& c, const TargetId& target);

}  // namespace flower
