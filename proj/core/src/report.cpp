#include "flower/report.hpp"

#include "flower/canonical.hpp"
#include "flower/closure.hpp"
#include "flower/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace flower {
namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': break;
      default: out += ch;
    }
  }
  return out;
}

// Table cells: no raw pipes or line breaks.
std::string cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    if (ch == '|') {
      out += "\\|";
    } else if (ch == '\n' || ch == '\r') {
      out += ' ';
    } else {
      out += ch;
    }
  }
  return out.empty() ? "-" : out;
}

std::string code(std::string_view id) { return "`" + std::string(id) + "`"; }

template <class Tag>
std::string id_list(const std::vector<Id<Tag>>& ids) {
  if (ids.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += code(ids[i].str());
  }
  return out;
}

std::string target_ref(const Case& c, const std::optional<TargetId>& t) {
  if (!t) return "attacker";
  const auto* node = c.find_target(*t);
  return (node ? cell(node->label) + " " : std::string()) + code(t->str());
}

std::string interval(const ActionLeaf& l) {
  if (l.observed_from == l.observed_to) return l.observed_from.to_string();
  return l.observed_from.to_string() + " .. " + l.observed_to.to_string();
}

void summary_section(std::ostream& out, const Case& c) {
  std::size_t initial = 0;
  std::size_t moves = 0;
  for (const auto& [_, e] : c.edges) (e.kind == EdgeKind::Move ? moves : initial)++;
  out << "## 1. Case summary\n\n"
      << "| Field | Value |\n|---|---|\n"
      << "| Name | " << cell(c.name) << " |\n"
      << "| Opened | " << c.opened_at.to_string() << " by " << cell(c.opened_by) << " |\n"
      << "| State | " << to_string(c.state) << " |\n";
  if (c.closed_at) {
    out << "| Closed | " << c.closed_at->to_string() << " by " << cell(c.closed_by.value_or("")) << " |\n";
  }
  out << "| Attacker | " << cell(c.attacker.label) << " |\n"
      << "| Initial information gathering | " << cell(c.attacker.info_gathering_notes.value_or(""))
      << " |\n"
      << "| Targets | " << c.targets.size() << " |\n"
      << "| Edges | " << c.edges.size() << " (" << initial << " initial compromise, " << moves
      << " move) |\n"
      << "| Action leaves | " << c.leaf_count() << " |\n"
      << "| Questions | " << c.questions.size() << " |\n"
      << "| Hypotheses | " << c.hypotheses.size() << " |\n"
      << "| Evidence items | " << c.evidence.size() << " |\n\n";
}

void graph_section(std::ostream& out, const Case& c) {
  out << "## 2. Attack graph\n\n"
      << "Graphviz rendering: `" << kGraphFile << "` (`flower export dot`).\n\n";
  if (c.edges.empty()) {
    out << "No compromise or move edges recorded.\n\n";
  } else {
    out << "### Edges\n\n| Edge | Kind | From | To | At | Vector | Evidence |\n|---|---|---|---|---|---|---|\n";
    for (const auto& [id, e] : c.edges) {
      out << "| " << code(id.str()) << " | " << to_string(e.kind) << " | " << target_ref(c, e.source)
          << " | " << target_ref(c, e.dest) << " | " << e.at.to_string() << " | " << cell(e.vector)
          << " | " << id_list(e.evidence) << " |\n";
    }
    out << "\n";
  }
  for (const auto& [id, t] : c.targets) {
    out << "### Target " << cell(t.label) << " (" << code(id.str()) << ")\n\n"
        << "First seen " << t.first_seen.to_string() << ".";
    if (!t.notes.empty()) out << " Notes: " << cell(t.notes);
    out << "\n\n";
    if (t.leaves.empty()) {
      out << "No action leaves recorded.\n\n";
      continue;
    }
    out << "| Leaf | Kind | Observed | Description | Technique | Evidence |\n|---|---|---|---|---|---|\n";
    for (const auto& l : t.leaves) {
      out << "| " << code(l.id.str()) << " | " << to_string(l.kind) << " | " << interval(l) << " | "
          << cell(l.description) << " | " << cell(l.technique.value_or("")) << " | " << id_list(l.evidence)
          << " |\n";
    }
    out << "\n";
  }
}

void questions_section(std::ostream& out, const Case& c) {
  out << "## 3. Questions\n\n";
  if (c.questions.empty()) {
    out << "No questions posed.\n\n";
    return;
  }
  out << "| Question | Scope | State | Text | Spawned from | Answer |\n|---|---|---|---|---|---|\n";
  for (const auto& [id, q] : c.questions) {
    out << "| " << code(id.str()) << " | " << (q.scope ? target_ref(c, q.scope) : "case-wide") << " | "
        << to_string(q.state) << " | " << cell(q.text) << " | "
        << (q.spawned_from ? "hypothesis " + code(q.spawned_from->str()) : "-") << " | "
        << (q.answer ? "hypothesis " + code(q.answer->str()) : "-") << " |\n";
  }
  out << "\n";
}

void steps_section(std::ostream& out, const Case& c) {
  out << "## 4. Collection steps\n\n";
  if (c.steps.empty()) {
    out << "No collection steps planned.\n\n";
    return;
  }
  out << "| Step | Question | Category | Source | Status | Collected |\n|---|---|---|---|---|---|\n";
  for (const auto& [id, s] : c.steps) {
    std::string collected = id_list(s.collected);
    if (s.status == StepStatus::Done && s.collected.empty()) collected = "empty yield";
    out << "| " << code(id.str()) << " | " << code(s.question.str()) << " | " << to_string(s.category)
        << " | " << cell(s.source_description) << " | " << to_string(s.status) << " | " << collected
        << " |\n";
  }
  out << "\n";
}

void filters_section(std::ostream& out, const Case& c) {
  out << "## 5. Filters applied\n\n";
  if (c.filters.empty()) {
    out << "No filters applied.\n\n";
    return;
  }
  out << "| Journal seq | Actor | Question | Expression | Matches |\n|---|---|---|---|---|\n";
  for (const auto& f : c.filters) {
    out << "| " << f.journal_seq << " | " << cell(f.actor) << " | "
        << (f.question ? code(f.question->str()) : "-") << " | " << cell(canonical_json(f.expression))
        << " | " << id_list(f.result) << " |\n";
  }
  out << "\n";
}

void hypotheses_section(std::ostream& out, const Case& c) {
  out << "## 6. Hypotheses and verification\n\n";
  if (c.hypotheses.empty()) {
    out << "No hypotheses proposed.\n\n";
    return;
  }
  for (const auto& [id, h] : c.hypotheses) {
    out << "### Hypothesis " << code(id.str()) << " (" << to_string(h.state) << ")\n\n"
        << "- Question: " << code(h.question.str()) << "\n"
        << "- Statement: " << cell(h.statement) << "\n"
        << "- Supporting evidence: " << id_list(h.supporting) << "\n\n";
    if (h.checks.empty()) {
      out << "No verification checks recorded.\n\n";
      continue;
    }
    out << "| Check | At | Actor | Outcome | Description | Evidence |\n|---|---|---|---|---|---|\n";
    for (const auto& chk : h.checks) {
      out << "| " << code(chk.id.str()) << " | " << chk.at.to_string() << " | " << cell(chk.actor) << " | "
          << to_string(chk.outcome) << " | " << cell(chk.description) << " | " << id_list(chk.evidence)
          << " |\n";
    }
    out << "\n";
  }
}

void evidence_section(std::ostream& out, const Case& c) {
  out << "## 7. Evidence inventory\n\n";
  if (c.evidence.empty()) {
    out << "No evidence ingested.\n\n";
    return;
  }
  std::map<EvidenceId, std::size_t> custody_counts;
  for (const auto& e : c.custody) ++custody_counts[e.evidence];
  out << "| Evidence | SHA-256 | Size | Category | Target | Acquired | By | Description | Custody entries |\n"
      << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [id, item] : c.evidence) {
    out << "| " << code(id.str()) << " | " << code(item.content_hash) << " | " << item.size_bytes << " | "
        << to_string(item.category) << " | "
        << (item.source_target ? target_ref(c, item.source_target) : "-") << " | "
        << item.acquired_at.to_string() << " | " << cell(item.acquired_by) << " | " << cell(item.description)
        << " | " << custody_counts[id] << " |\n";
  }
  out << "\nCustody chain length: " << c.custody.size() << "; signer keys: " << c.signer_keys.size()
      << ".\n\n";
}

void iterations_section(std::ostream& out, const Case& c) {
  out << "## 8. Iteration history\n\n";
  if (c.iterations.empty()) {
    out << "No iterations recorded.\n\n";
    return;
  }
  out << "| Iteration | Opened | Closed | Trigger |\n|---|---|---|---|\n";
  for (const auto& r : c.iterations) {
    out << "| " << r.seq << " | " << r.opened_at.to_string() << " | "
        << (r.closed_at ? r.closed_at->to_string() : "open") << " | " << cell(r.trigger) << " |\n";
  }
  out << "\n";
}

void closure_section(std::ostream& out, const Case& c) {
  const ClosureReport r = closure_status(c);
  out << "## 9. Closure status\n\n"
      << "closed_allowed: " << (r.closed_allowed ? "true" : "false") << "\n\n";
  out << "- Unanswered questions: " << id_list(r.unanswered_questions) << "\n"
      << "- Targets with unresolved origin: " << id_list(r.unresolved_origins) << "\n"
      << "- Graph violations: " << r.graph_violations.size() << "\n"
      << "- Warnings: " << r.warnings.size() << "\n";
  if (!r.graph_violations.empty()) {
    out << "\n| Rule | Entity | Message |\n|---|---|---|\n";
    for (const auto& v : r.graph_violations) {
      out << "| " << v.rule << " | " << code(v.entity) << " | " << cell(v.message) << " |\n";
    }
  }
  if (!r.warnings.empty()) {
    out << "\n| Warning | Entity | Message |\n|---|---|---|\n";
    for (const auto& w : r.warnings) {
      out << "| " << w.kind << " | " << code(w.entity) << " | " << cell(w.message) << " |\n";
    }
  }
}

void add_node(std::ostream& out, std::string_view indent, std::string_view id, std::string_view attrs) {
  out << indent << '"' << id << "\" [" << attrs << "];\n";
}

}  // namespace

std::string export_dot(const Case& c) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(c.name) << "\" {\n"
      << "  compound=true;\n"
      << "  rankdir=LR;\n"
      << "  node [fontname=\"Helvetica\"];\n"
      << "  edge [fontname=\"Helvetica\", fontsize=10];\n";
  add_node(out, "  ", "attacker",
           "shape=doubleoctagon, style=filled, fillcolor=\"#f4cccc\", label=\"Attacker\\n" +
               dot_escape(c.attacker.label) + "\"");
  for (const auto& [id, t] : c.targets) {
    out << "  subgraph \"cluster_" << id.str() << "\" {\n"
        << "    label=\"" << dot_escape(t.label) << "\\n" << id.str() << "\";\n"
        << "    style=rounded;\n";
    add_node(out, "    ", id.str(), "shape=box, style=filled, fillcolor=\"#d9ead3\", label=\"" +
                                         dot_escape(t.label) + "\"");
    for (const auto& l : t.leaves) {
      add_node(out, "    ", l.id.str(),
               "shape=ellipse, label=\"" + std::string(to_string(l.kind)) + "\\n" + dot_escape(interval(l)) + "\"");
    }
    out << "  }\n";
  }
  for (const auto& [id, e] : c.edges) {
    const std::string source = e.source ? e.source->str() : "attacker";
    out << "  \"" << source << "\" -> \"" << e.dest.str() << "\" [id=\"" << id.str() << "\", label=\""
        << e.at.to_string() << "\"";
    if (e.source) out << ", ltail=\"cluster_" << e.source->str() << "\"";
    out << ", lhead=\"cluster_" << e.dest.str() << "\"";
    if (e.kind == EdgeKind::Move) out << ", style=bold";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_case_json(const Case& c) { return canonical_json(case_to_json(c)) + "\n"; }

Case import_case_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("case file is not JSON: ") + e.what());
  }
  return case_from_json(doc);
}

std::string generate_report(const Case& c, Timestamp generated_at) {
  std::ostringstream out;
  out << "# Attack report: " << cell(c.name) << "\n\n"
      << "- Status: " << (c.state == CaseState::Closed ? "FINAL" : "DRAFT") << "\n"
      << "- Case: " << code(c.id.str()) << "\n"
      << "- Generated: " << generated_at.to_string() << "\n\n";
  summary_section(out, c);
  graph_section(out, c);
  questions_section(out, c);
  steps_section(out, c);
  filters_section(out, c);
  hypotheses_section(out, c);
  evidence_section(out, c);
  iterations_section(out, c);
  closure_section(out, c);
  return out.str();
}

std::vector<TimelineEntry> timeline(const Case& c) {
  std::vector<TimelineEntry> out;
  for (const auto& [id, e] : c.edges) {
    out.push_back({e.at, id.str(), std::string(to_string(e.kind)), e.dest.str(),
                   (e.source ? e.source->str() : std::string("attacker")) + " -> " + e.dest.str() + ": " +
                       e.vector});
  }
  for (const auto& [tid, t] : c.targets) {
    for (const auto& l : t.leaves) {
      out.push_back({l.observed_from, l.id.str(), std::string(to_string(l.kind)), tid.str(), l.description});
    }
  }
  std::sort(out.begin(), out.end(), [](const TimelineEntry& a, const TimelineEntry& b) {
    return std::tie(a.at, a.id) < std::tie(b.at, b.id);
  });
  return out;
}

}  // namespace flower
