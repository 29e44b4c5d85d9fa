#pragma once

#include "flower/graph.hpp"
#include "flower/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace flower {

// Non-blocking finding, e.g. a leaf or edge recorded without evidence.
struct ClosureWarning {
  std::string entity;
  std::string kind;
  std::string message;

  bool operator==(const ClosureWarning&) const = default;
};

struct ClosureReport {
  std::vector<QuestionId> unanswered_questions;
  std::vector<TargetId> unresolved_origins;
  std::vector<Violation> graph_violations;
  std::vector<ClosureWarning> warnings;
  bool closed_allowed = false;

  nlohmann::json to_json() const;
};

// A target's origin is resolved when it has an inbound edge and some
// Answered question scoped to it was answered by a hypothesis whose
// supporting evidence intersects that edge's evidence.
bool origin_resolved(const Case& c, const TargetId& target);

ClosureReport closure_status(const Case& c);

}  // namespace flower
