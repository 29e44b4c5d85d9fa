#include "graph_oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <stdexcept>

namespace flower::testing {

std::int64_t oracle_seconds(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ", &y, &mo, &d, &h, &mi, &se) != 6) {
    throw std::runtime_error("oracle cannot parse timestamp " + s);
  }
  auto leap = [](int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; };
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::int64_t days = 0;
  if (y >= 1970) {
    for (int yr = 1970; yr < y; ++yr) days += leap(yr) ? 366 : 365;
  } else {
    for (int yr = y; yr < 1970; ++yr) days -= leap(yr) ? 366 : 365;
  }
  for (int m = 1; m < mo; ++m) days += kDays[m - 1] + (m == 2 && leap(y) ? 1 : 0);
  days += d - 1;
  return days * 86400 + h * 3600 + mi * 60 + se;
}

PlainGraph plain_graph(const nlohmann::json& c) {
  PlainGraph g;
  for (const auto& t : c.at("targets")) {
    g.targets.insert(t.at("id").get<std::string>());
    for (const auto& l : t.value("leaves", nlohmann::json::array())) {
      PlainLeaf leaf;
      leaf.id = l.at("id").get<std::string>();
      leaf.target = t.at("id").get<std::string>();
      leaf.move = l.at("kind").get<std::string>() == "move";
      leaf.from = oracle_seconds(l.at("observed_from").get<std::string>());
      leaf.to = oracle_seconds(l.at("observed_to").get<std::string>());
      leaf.evidence = l.value("evidence", std::vector<std::string>{});
      if (l.contains("edge") && !l["edge"].is_null()) leaf.edge = l["edge"].get<std::string>();
      g.leaves.push_back(std::move(leaf));
    }
  }
  for (const auto& e : c.at("edges")) {
    PlainEdge edge;
    edge.id = e.at("id").get<std::string>();
    edge.move = e.at("kind").get<std::string>() == "move";
    const auto& src = e.at("source");
    if (src.is_string() && src.get<std::string>() != "attacker") edge.source = src.get<std::string>();
    edge.dest = e.at("dest").get<std::string>();
    edge.at = oracle_seconds(e.at("at").get<std::string>());
    edge.evidence = e.value("evidence", std::vector<std::string>{});
    g.edges.push_back(std::move(edge));
  }
  for (const auto& item : c.at("evidence")) g.evidence.insert(item.at("id").get<std::string>());
  return g;
}

std::vector<RuleHit> brute_force_violations(const PlainGraph& g) {
  std::vector<RuleHit> hits;
  auto hit = [&](const char* rule, const std::string& entity) { hits.emplace_back(rule, entity); };
  auto known = [&](const std::string& t) { return g.targets.count(t) > 0; };

  // Reachability: relax until nothing changes.
  std::set<std::string> reached;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : g.edges) {
      if (!known(e.dest) || (e.source && !known(*e.source))) continue;
      const bool from_reached = !e.source || reached.count(*e.source) > 0;
      if (from_reached && reached.insert(e.dest).second) changed = true;
    }
  }

  for (const auto& e : g.edges) {
    if (!known(e.dest)) hit("DanglingTarget", e.id);
    if (e.source && !known(*e.source)) hit("DanglingTarget", e.id);
    if (!e.move && e.source) hit("InvalidEdgeSource", e.id);
    if (e.move && !e.source) hit("InvalidEdgeSource", e.id);
    if (e.move && e.source && *e.source == e.dest) hit("SelfMove", e.id);
    if (e.move && e.source && known(*e.source)) {
      bool preceded = false;
      for (const auto& other : g.edges) {
        if (other.dest == *e.source && other.at <= e.at) preceded = true;
      }
      if (!preceded) hit("TemporalViolation", e.id);
    }
    for (const auto& ev : e.evidence) {
      if (!g.evidence.count(ev)) hit("DanglingEvidenceRef", e.id);
    }
  }

  for (const auto& t : g.targets) {
    bool inbound = false;
    for (const auto& e : g.edges) inbound = inbound || e.dest == t;
    if (!inbound) {
      hit("UnresolvedOrigin", t);
    } else if (!reached.count(t)) {
      hit("Unreachable", t);
    }
  }

  auto claims = [&](const PlainEdge& e) {
    int n = 0;
    for (const auto& l : g.leaves) {
      if (l.move && l.edge == e.id && e.move && e.source == l.target) ++n;
    }
    return n;
  };
  for (const auto& l : g.leaves) {
    if (l.from > l.to) hit("InvalidInterval", l.id);
    for (const auto& ev : l.evidence) {
      if (!g.evidence.count(ev)) hit("DanglingEvidenceRef", l.id);
    }
    if (!l.move) continue;
    const PlainEdge* paired = nullptr;
    for (const auto& e : g.edges) {
      if (l.edge && e.id == *l.edge && e.move && e.source == l.target) paired = &e;
    }
    if (!paired || claims(*paired) != 1) hit("UnpairedMoveLeaf", l.id);
  }
  for (const auto& e : g.edges) {
    if (e.move && claims(e) != 1) hit("UnpairedMoveEdge", e.id);
  }

  std::sort(hits.begin(), hits.end());
  return hits;
}

std::vector<std::vector<std::string>> brute_force_paths(const PlainGraph& g, const std::string& target) {
  struct Partial {
    std::vector<std::string> edges;
    std::vector<std::string> visited;
  };
  auto usable = [&](const PlainEdge& e) {
    return g.targets.count(e.dest) && (!e.source || g.targets.count(*e.source));
  };
  std::vector<std::vector<std::string>> out;
  std::deque<Partial> queue;
  for (const auto& e : g.edges) {
    if (usable(e) && !e.source) queue.push_back({{e.id}, {e.dest}});
  }
  while (!queue.empty()) {
    Partial p = std::move(queue.front());
    queue.pop_front();
    const std::string& at = p.visited.back();
    if (at == target) {
      out.push_back(p.edges);
      continue;
    }
    for (const auto& e : g.edges) {
      if (!usable(e) || !e.source || *e.source != at) continue;
      if (std::find(p.visited.begin(), p.visited.end(), e.dest) != p.visited.end()) continue;
      Partial next = p;
      next.edges.push_back(e.id);
      next.visited.push_back(e.dest);
      queue.push_back(std::move(next));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace flower::testing
