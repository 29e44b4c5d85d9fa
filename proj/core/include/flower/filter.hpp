#pragma once

#include "flower/model.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace flower {

struct FilterSpec;

namespace filter {

// Inclusive on both ends; applies to acquired_at.
struct TimeRange {
  Timestamp from;
  Timestamp to;
};
struct Category {
  DataSourceCategory value;
};
struct Target {
  TargetId value;
};
// Case-insensitive substring over the item's description and acquired_by.
struct Keyword {
  std::string needle;
};
struct And {
  std::vector<FilterSpec> terms;
};
struct Or {
  std::vector<FilterSpec> terms;
};
struct Not {
  std::shared_ptr<const FilterSpec> term;
};

}  // namespace filter

// Predicate tree over evidence metadata. Wire form:
//   {"time_range":{"from":T,"to":T}} | {"category":"host"} | {"target":ID}
//   | {"keyword":"ssh"} | {"and":[...]} | {"or":[...]} | {"not":{...}}
struct FilterSpec {
  using Node = std::variant<filter::TimeRange, filter::Category, filter::Target, filter::Keyword,
                            filter::And, filter::Or, filter::Not>;
  Node node;

  static FilterSpec time_range(Timestamp from, Timestamp to);
  static FilterSpec category(DataSourceCategory c);
  static FilterSpec target(TargetId t);
  static FilterSpec keyword(std::string needle);
  static FilterSpec all_of(std::vector<FilterSpec> terms);
  static FilterSpec any_of(std::vector<FilterSpec> terms);
  static FilterSpec negate(FilterSpec term);

  // Throws Error{ValidationError} on a malformed tree.
  static FilterSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool matches(const EvidenceItem& item) const;
};

// Ids of every vault item whose metadata satisfies `spec`, in id order.
std::vector<EvidenceId> apply_filter(const Case& c, const FilterSpec& spec);

}  // namespace flower
