#pragma once

#include "flower/model.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flower {

inline constexpr std::string_view kReportFile = "report.md";
inline constexpr std::string_view kGraphFile = "graph.dot";
inline constexpr std::string_view kCaseFile = "case.json";

// Graphviz rendering of the flower model: the attacker as a distinct node,
// one cluster per target holding its leaves, and one DOT edge per
// EdgeEvent labelled with its timestamp. Deterministic.
std::string export_dot(const Case& c);

// Canonical "flowercase/1" JSON, LF-terminated.
std::string export_case_json(const Case& c);
// Throws Error{UnsupportedSchema} for a missing or unknown schema.
Case import_case_json(std::string_view text);

// CommonMark audit report with nine sections in fixed order. A pure
// function of (case, generated_at).
std::string generate_report(const Case& c, Timestamp generated_at);

struct TimelineEntry {
  Timestamp at;
  // Id of the EdgeEvent or ActionLeaf.
  std::string id;
  std::string kind;
  std::string target;
  std::string summary;

  bool operator==(const TimelineEntry&) const = default;
};

// Every edge (at its timestamp) and leaf (at observed_from), sorted by
// (timestamp, id).
std::vector<TimelineEntry> timeline(const Case& c);

}  // namespace flower
