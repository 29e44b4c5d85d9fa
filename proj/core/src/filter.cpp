#include "flower/filter.hpp"

#include "flower/error.hpp"

#include <algorithm>
#include <cctype>

namespace flower {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle_lower) {
  return lowercase(haystack).find(needle_lower) != std::string::npos;
}

[[noreturn]] void bad_filter(const std::string& why) {
  throw Error(ErrorKind::ValidationError, "malformed filter: " + why);
}

std::vector<FilterSpec> parse_terms(const nlohmann::json& arr, std::string_view op) {
  if (!arr.is_array()) bad_filter("'" + std::string(op) + "' takes an array");
  std::vector<FilterSpec> terms;
  terms.reserve(arr.size());
  for (const auto& t : arr) terms.push_back(FilterSpec::from_json(t));
  return terms;
}

}  // namespace

FilterSpec FilterSpec::time_range(Timestamp from, Timestamp to) { return {filter::TimeRange{from, to}}; }
FilterSpec FilterSpec::category(DataSourceCategory c) { return {filter::Category{c}}; }
FilterSpec FilterSpec::target(TargetId t) { return {filter::Target{std::move(t)}}; }
FilterSpec FilterSpec::keyword(std::string needle) { return {filter::Keyword{std::move(needle)}}; }
FilterSpec FilterSpec::all_of(std::vector<FilterSpec> terms) { return {filter::And{std::move(terms)}}; }
FilterSpec FilterSpec::any_of(std::vector<FilterSpec> terms) { return {filter::Or{std::move(terms)}}; }
FilterSpec FilterSpec::negate(FilterSpec term) {
  return {filter::Not{std::make_shared<const FilterSpec>(std::move(term))}};
}

FilterSpec FilterSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1) bad_filter("each node must be an object with one operator");
  const auto it = j.begin();
  const std::string op = it.key();
  const nlohmann::json& arg = it.value();
  try {
    if (op == "and") return all_of(parse_terms(arg, op));
    if (op == "or") return any_of(parse_terms(arg, op));
    if (op == "not") return negate(from_json(arg));
    if (op == "category") return category(parse_enum<DataSourceCategory>(arg.get<std::string>()));
    if (op == "target") return target(arg.get<TargetId>());
    if (op == "keyword") return keyword(arg.get<std::string>());
    if (op == "time_range") {
      if (!arg.is_object()) bad_filter("time_range takes {from, to}");
      return time_range(arg.at("from").get<Timestamp>(), arg.at("to").get<Timestamp>());
    }
  } catch (const nlohmann::json::exception& e) {
    bad_filter(std::string(op) + ": " + e.what());
  }
  bad_filter("unknown operator '" + std::string(op) + "'");
}

nlohmann::json FilterSpec::to_json() const {
  auto terms_json = [](const std::vector<FilterSpec>& terms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : terms) arr.push_back(t.to_json());
    return arr;
  };
  return std::visit(
      Overloaded{
          [](const filter::TimeRange& r) -> nlohmann::json {
            return {{"time_range", {{"from", r.from}, {"to", r.to}}}};
          },
          [](const filter::Category& c) -> nlohmann::json {
            return {{"category", to_string(c.value)}};
          },
          [](const filter::Target& t) -> nlohmann::json { return {{"target", t.value}}; },
          [](const filter::Keyword& k) -> nlohmann::json { return {{"keyword", k.needle}}; },
          [&](const filter::And& a) -> nlohmann::json { return {{"and", terms_json(a.terms)}}; },
          [&](const filter::Or& o) -> nlohmann::json { return {{"or", terms_json(o.terms)}}; },
          [](const filter::Not& n) -> nlohmann::json { return {{"not", n.term->to_json()}}; },
      },
      node);
}

bool FilterSpec::matches(const EvidenceItem& item) const {
  return std::visit(
      Overloaded{
          [&](const filter::TimeRange& r) {
            return r.from <= item.acquired_at && item.acquired_at <= r.to;
          },
          [&](const filter::Category& c) { return item.category == c.value; },
          [&](const filter::Target& t) { return item.source_target == t.value; },
          [&](const filter::Keyword& k) {
            const std::string needle = lowercase(k.needle);
            return contains_ci(item.description, needle) || contains_ci(item.acquired_by, needle);
          },
          [&](const filter::And& a) {
            return std::all_of(a.terms.begin(), a.terms.end(),
                               [&](const FilterSpec& t) { return t.matches(item); });
          },
          [&](const filter::Or& o) {
            return std::any_of(o.terms.begin(), o.terms.end(),
                               [&](const FilterSpec& t) { return t.matches(item); });
          },
          [&](const filter::Not& n) { return !n.term->matches(item); },
      },
      node);
}

std::vector<EvidenceId> apply_filter(const Case& c, const FilterSpec& spec) {
  std::vector<EvidenceId> out;
  for (const auto& [id, item] : c.evidence) {
    if (spec.matches(item)) out.push_back(id);
  }
  return out;
}

}  // namespace flower
