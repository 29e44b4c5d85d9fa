#include "flower/closure.hpp"

#include <algorithm>

namespace flower {

nlohmann::json ClosureReport::to_json() const {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : graph_violations) violations.push_back(flower::to_json(v));
  nlohmann::json warn = nlohmann::json::array();
  for (const auto& w : warnings) {
    warn.push_back({{"entity", w.entity}, {"kind", w.kind}, {"message", w.message}});
  }
  return {
      {"closed_allowed", closed_allowed},
      {"unanswered_questions", unanswered_questions},
      {"unresolved_origins", unresolved_origins},
      {"graph_violations", std::move(violations)},
      {"warnings", std::move(warn)},
  };
}

bool origin_resolved(const Case& c, const TargetId& target) {
  const auto inbound = c.inbound_edges(target);
  if (inbound.empty()) return false;
  for (const auto& [_, q] : c.questions) {
    if (q.state != QuestionState::Answered || q.scope != target || !q.answer) continue;
    auto h = c.hypotheses.find(*q.answer);
    if (h == c.hypotheses.end()) continue;
    const auto& supporting = h->second.supporting;
    for (const EdgeEvent* e : inbound) {
      const bool shared = std::any_of(e->evidence.begin(), e->evidence.end(), [&](const EvidenceId& id) {
        return std::binary_search(supporting.begin(), supporting.end(), id);
      });
      if (shared) return true;
    }
  }
  return false;
}

ClosureReport closure_status(const Case& c) {
  ClosureReport r;
  for (const auto& [id, q] : c.questions) {
    if (q.state != QuestionState::Answered && q.state != QuestionState::Withdrawn) {
      r.unanswered_questions.push_back(id);
    }
  }
  for (const auto& [id, t] : c.targets) {
    if (!origin_resolved(c, id)) r.unresolved_origins.push_back(id);
    for (const auto& l : t.leaves) {
      if (l.evidence.empty()) {
        r.warnings.push_back({l.id.str(), "leaf", "unsupported: " + std::string(to_string(l.kind)) +
                                                      " leaf has no evidence"});
      }
    }
  }
  for (const auto& [id, e] : c.edges) {
    if (e.evidence.empty()) {
      r.warnings.push_back({id.str(), "edge", "unsupported: " + std::string(to_string(e.kind)) +
                                                  " edge has no evidence"});
    }
  }
  std::sort(r.warnings.begin(), r.warnings.end(), [](const ClosureWarning& a, const ClosureWarning& b) {
    return a.entity < b.entity;
  });
  r.graph_violations = validate_graph(c);
  r.closed_allowed =
      r.unanswered_questions.empty() && r.unresolved_origins.empty() && r.graph_violations.empty();
  return r;
}

}  // namespace flower
