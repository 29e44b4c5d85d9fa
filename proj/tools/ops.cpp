#include "ops.hpp"

#include "flower/error.hpp"
#include "flower/filter.hpp"

#include <functional>
#include <map>

namespace flower::ops {
namespace {

using nlohmann::json;

const json& require(const json& p, std::string_view key) {
  auto it = p.find(key);
  if (it == p.end() || it->is_null()) {
    throw Error(ErrorKind::ValidationError, "missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string str(const json& p, std::string_view key) {
  const json& v = require(p, key);
  if (!v.is_string()) throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const json& p, std::string_view key) {
  if (!p.contains(key) || p.at(std::string(key)).is_null()) return std::nullopt;
  return str(p, key);
}

Timestamp time(const json& p, std::string_view key) { return Timestamp::parse(str(p, key)); }

std::optional<Timestamp> opt_time(const json& p, std::string_view key) {
  auto s = opt_str(p, key);
  if (!s) return std::nullopt;
  return Timestamp::parse(*s);
}

template <class Tag>
Id<Tag> id(const json& p, std::string_view key) {
  return Id<Tag>(str(p, key));
}

template <class Tag>
std::optional<Id<Tag>> opt_id(const json& p, std::string_view key) {
  auto s = opt_str(p, key);
  if (!s) return std::nullopt;
  return Id<Tag>(*s);
}

template <class Tag>
std::vector<Id<Tag>> ids(const json& p, std::string_view key) {
  auto it = p.find(key);
  if (it == p.end() || it->is_null()) return {};
  if (!it->is_array()) throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must be an array");
  std::vector<Id<Tag>> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw Error(ErrorKind::ValidationError, "field '" + std::string(key) + "' must hold ids");
    out.emplace_back(v.get<std::string>());
  }
  return out;
}

template <class E>
E enumerated(const json& p, std::string_view key) {
  return parse_enum<E>(str(p, key));
}

const SigningKey& key_of(const Context& ctx) {
  if (!ctx.key) throw Error(ErrorKind::SigningError, "no signing key supplied");
  return *ctx.key;
}

json with_seq(json body, const Session& s) {
  body["seq"] = s.last_seq();
  return body;
}

using Handler = std::function<json(Session&, const json&, const Context&)>;

const std::map<std::string_view, Handler>& handlers() {
  static const std::map<std::string_view, Handler> table = {
      {"annotate_attacker",
       [](Session& s, const json& p, const Context& c) {
         s.annotate_attacker(str(p, "label"), opt_str(p, "info_gathering_notes"), c.actor);
         json out = {{"label", s.state().attacker.label}};
         if (s.state().attacker.info_gathering_notes) {
           out["info_gathering_notes"] = *s.state().attacker.info_gathering_notes;
         }
         return out;
       }},
      {"add_target",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.add_target(str(p, "label"), time(p, "first_seen"), c.actor,
                                     opt_str(p, "notes").value_or("")));
       }},
      {"record_initial_compromise",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.record_initial_compromise(id<TargetTag>(p, "dest"), time(p, "at"), str(p, "vector"),
                                                    ids<EvidenceTag>(p, "evidence"), c.actor));
       }},
      {"record_move",
       [](Session& s, const json& p, const Context& c) {
         auto [edge, leaf] = s.record_move(id<TargetTag>(p, "source"), id<TargetTag>(p, "dest"), time(p, "at"),
                                           str(p, "technique"), ids<EvidenceTag>(p, "evidence"), c.actor);
         json out = to_json(edge);
         out["leaf"] = to_json(leaf);
         return out;
       }},
      {"record_action",
       [](Session& s, const json& p, const Context& c) {
         const Timestamp from = time(p, "observed_from");
         return to_json(s.record_action(id<TargetTag>(p, "target"), enumerated<LeafKind>(p, "kind"), from,
                                        opt_time(p, "observed_to").value_or(from), str(p, "description"),
                                        ids<EvidenceTag>(p, "evidence"), c.actor, opt_str(p, "technique")));
       }},
      {"pose_question",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.pose_question(opt_id<TargetTag>(p, "scope"), str(p, "text"), c.actor,
                                        opt_id<HypothesisTag>(p, "spawned_from")));
       }},
      {"withdraw_question",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.withdraw_question(id<QuestionTag>(p, "question"), c.actor));
       }},
      {"answer_question",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.answer_question(id<QuestionTag>(p, "question"), id<HypothesisTag>(p, "hypothesis"),
                                          c.actor));
       }},
      {"plan_collection",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.plan_collection(id<QuestionTag>(p, "question"),
                                          enumerated<DataSourceCategory>(p, "category"),
                                          str(p, "source_description"), c.actor));
       }},
      {"attach_collected",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.attach_collected(id<StepTag>(p, "step"), ids<EvidenceTag>(p, "evidence"), c.actor));
       }},
      {"apply_filter",
       [](Session& s, const json& p, const Context& c) {
         const auto spec = FilterSpec::from_json(require(p, "expression"));
         return json{{"expression", spec.to_json()},
                     {"result", s.run_filter(spec, opt_id<QuestionTag>(p, "question"), c.actor)}};
       }},
      {"propose_hypothesis",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.propose_hypothesis(id<QuestionTag>(p, "question"), str(p, "statement"),
                                             ids<EvidenceTag>(p, "supporting"), c.actor));
       }},
      {"record_check",
       [](Session& s, const json& p, const Context& c) {
         auto check = s.record_check(id<HypothesisTag>(p, "hypothesis"), str(p, "description"),
                                     enumerated<CheckOutcome>(p, "outcome"), ids<EvidenceTag>(p, "evidence"),
                                     c.actor, opt_time(p, "at").value_or(c.clock()));
         json out = to_json(check);
         out["hypothesis"] = to_json(s.state().hypotheses.at(HypothesisId(str(p, "hypothesis"))));
         return out;
       }},
      {"open_iteration",
       [](Session& s, const json& p, const Context& c) {
         return to_json(s.open_iteration(str(p, "trigger"), opt_time(p, "at").value_or(c.clock()), c.actor));
       }},
      {"close_case",
       [](Session& s, const json& p, const Context& c) {
         s.close_case(c.actor, opt_time(p, "at").value_or(c.clock()));
         return json{{"id", s.state().id}, {"state", to_string(s.state().state)}};
       }},
      {"register_key",
       [](Session& s, const json&, const Context& c) { return to_json(s.register_key(key_of(c), c.actor)); }},
      {"verify_item",
       [](Session& s, const json& p, const Context& c) {
         const auto r = s.verify_item(id<EvidenceTag>(p, "evidence"), c.actor, key_of(c));
         return json{{"evidence", r.evidence},
                     {"status", to_string(r.status)},
                     {"expected", r.expected},
                     {"actual", r.actual}};
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string_view>& names() {
  static const std::vector<std::string_view> out = [] {
    std::vector<std::string_view> v;
    for (const auto& [name, _] : handlers()) v.push_back(name);
    return v;
  }();
  return out;
}

json run(Session& session, std::string_view op, const json& params, const Context& ctx) {
  const auto& table = handlers();
  auto it = table.find(op);
  if (it == table.end()) throw Error(ErrorKind::ValidationError, "unknown operation: " + std::string(op));
  if (!params.is_object()) throw Error(ErrorKind::ValidationError, "parameters must be a JSON object");
  return with_seq(it->second(session, params, ctx), session);
}

json ingest(Session& session, std::span<const std::uint8_t> bytes, const json& params, const Context& ctx) {
  if (!params.is_object()) throw Error(ErrorKind::ValidationError, "parameters must be a JSON object");
  EvidenceMetadata meta;
  meta.step = id<StepTag>(params, "step");
  if (auto c = opt_str(params, "category")) meta.category = parse_enum<DataSourceCategory>(*c);
  meta.source_target = opt_id<TargetTag>(params, "source_target");
  meta.description = opt_str(params, "description").value_or("");
  meta.acquired_at = opt_time(params, "acquired_at");
  auto [item, entry] = session.ingest_evidence(bytes, meta, ctx.actor, key_of(ctx));
  json out = to_json(item);
  out["custody"] = to_json(entry);
  return with_seq(std::move(out), session);
}

}  // namespace flower::ops
