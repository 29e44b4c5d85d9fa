#include "flower/graph.hpp"

#include "flower/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace flower {
namespace {

void check_evidence(const Case& c, const std::string& entity, const std::vector<EvidenceId>& refs,
                    std::vector<Violation>& out) {
  for (const auto& e : refs) {
    if (!c.evidence.contains(e)) {
      out.push_back({std::string(rule::kDanglingEvidenceRef), entity,
                     "evidence " + e.str() + " is not in the vault"});
    }
  }
}

bool edge_is_well_formed(const Case& c, const EdgeEvent& e) {
  if (!c.targets.contains(e.dest)) return false;
  if (e.source && !c.targets.contains(*e.source)) return false;
  return true;
}

std::set<TargetId> reachable_targets(const Case& c) {
  std::multimap<std::optional<TargetId>, const EdgeEvent*> out_edges;
  for (const auto& [_, e] : c.edges) {
    if (edge_is_well_formed(c, e)) out_edges.emplace(e.source, &e);
  }
  std::set<TargetId> seen;
  std::deque<std::optional<TargetId>> frontier = {std::nullopt};
  while (!frontier.empty()) {
    const auto node = frontier.front();
    frontier.pop_front();
    auto [lo, hi] = out_edges.equal_range(node);
    for (auto it = lo; it != hi; ++it) {
      if (seen.insert(it->second->dest).second) frontier.push_back(it->second->dest);
    }
  }
  return seen;
}

}  // namespace

nlohmann::json to_json(const Violation& v) {
  return {{"rule", v.rule}, {"entity", v.entity}, {"message", v.message}};
}

std::vector<Violation> validate_graph(const Case& c) {
  std::vector<Violation> out;

  std::map<TargetId, std::size_t> inbound_count;
  for (const auto& [id, e] : c.edges) {
    const std::string eid = id.str();
    if (!c.targets.contains(e.dest)) {
      out.push_back({std::string(rule::kDanglingTarget), eid, "destination " + e.dest.str() + " unknown"});
    } else {
      ++inbound_count[e.dest];
    }
    if (e.source && !c.targets.contains(*e.source)) {
      out.push_back({std::string(rule::kDanglingTarget), eid, "source " + e.source->str() + " unknown"});
    }
    if (e.kind == EdgeKind::InitialCompromise && e.source) {
      out.push_back({std::string(rule::kInvalidEdgeSource), eid,
                     "initial compromise must originate at the attacker"});
    }
    if (e.kind == EdgeKind::Move && !e.source) {
      out.push_back({std::string(rule::kInvalidEdgeSource), eid, "move must originate at a target"});
    }
    if (e.kind == EdgeKind::Move && e.source && *e.source == e.dest) {
      out.push_back({std::string(rule::kSelfMove), eid, "move source equals destination"});
    }
    if (e.kind == EdgeKind::Move && e.source && c.targets.contains(*e.source)) {
      const auto earliest = c.earliest_inbound(*e.source);
      if (!earliest) {
        out.push_back({std::string(rule::kTemporalViolation), eid,
                       "source " + e.source->str() + " has no inbound edge"});
      } else if (e.at < *earliest) {
        out.push_back({std::string(rule::kTemporalViolation), eid,
                       "move at " + e.at.to_string() + " precedes source compromise at " +
                           earliest->to_string()});
      }
    }
    check_evidence(c, eid, e.evidence, out);
  }

  const auto reachable = reachable_targets(c);
  std::map<EdgeId, std::vector<const ActionLeaf*>> move_leaves_by_edge;
  for (const auto& [tid, t] : c.targets) {
    const std::string id = tid.str();
    if (!inbound_count.contains(tid)) {
      out.push_back({std::string(rule::kUnresolvedOrigin), id, "target has no inbound edge"});
    } else if (!reachable.contains(tid)) {
      out.push_back({std::string(rule::kUnreachable), id, "target is not reachable from the attacker"});
    }
    for (const auto& l : t.leaves) {
      const std::string lid = l.id.str();
      if (l.observed_to < l.observed_from) {
        out.push_back({std::string(rule::kInvalidInterval), lid, "observed_from is after observed_to"});
      }
      check_evidence(c, lid, l.evidence, out);
      if (l.kind != LeafKind::Move) continue;
      if (!l.edge) {
        out.push_back({std::string(rule::kUnpairedMoveLeaf), lid, "move leaf references no edge"});
        continue;
      }
      auto e = c.edges.find(*l.edge);
      if (e == c.edges.end() || e->second.kind != EdgeKind::Move || e->second.source != l.target) {
        out.push_back({std::string(rule::kUnpairedMoveLeaf), lid,
                       "edge " + l.edge->str() + " is not a move out of this target"});
        continue;
      }
      move_leaves_by_edge[*l.edge].push_back(&l);
    }
  }

  for (const auto& [eid, leaves] : move_leaves_by_edge) {
    if (leaves.size() > 1) {
      for (const auto* l : leaves) {
        out.push_back({std::string(rule::kUnpairedMoveLeaf), l->id.str(),
                       "edge " + eid.str() + " is claimed by several move leaves"});
      }
    }
  }
  for (const auto& [eid, e] : c.edges) {
    if (e.kind != EdgeKind::Move) continue;
    auto it = move_leaves_by_edge.find(eid);
    const std::size_t n = it == move_leaves_by_edge.end() ? 0 : it->second.size();
    if (n != 1) {
      out.push_back({std::string(rule::kUnpairedMoveEdge), eid.str(),
                     "move edge is paired with " + std::to_string(n) + " move leaves"});
    }
  }

  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.entity, a.rule, a.message) < std::tie(b.entity, b.rule, b.message);
  });
  return out;
}

std::vector<AttackPath> attack_chains(const Case& c, const TargetId& target) {
  if (!c.targets.contains(target)) {
    throw Error(ErrorKind::NotFound, "target " + target.str() + " not found");
  }
  std::multimap<std::optional<TargetId>, const EdgeEvent*> out_edges;
  for (const auto& [_, e] : c.edges) {
    if (edge_is_well_formed(c, e)) out_edges.emplace(e.source, &e);
  }

  std::vector<AttackPath> paths;
  AttackPath current;
  std::set<TargetId> on_path;

  auto dfs = [&](auto&& self, const std::optional<TargetId>& node) -> void {
    auto [lo, hi] = out_edges.equal_range(node);
    for (auto it = lo; it != hi; ++it) {
      const EdgeEvent& e = *it->second;
      if (on_path.contains(e.dest)) continue;
      current.push_back(e.id);
      if (e.dest == target) {
        paths.push_back(current);
      } else {
        on_path.insert(e.dest);
        self(self, e.dest);
        on_path.erase(e.dest);
      }
      current.pop_back();
    }
  };
  dfs(dfs, std::nullopt);

  std::sort(paths.begin(), paths.end(), [](const AttackPath& a, const AttackPath& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return paths;
}

}  // namespace flower
