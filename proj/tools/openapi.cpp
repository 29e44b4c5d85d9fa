#include "service.hpp"

namespace flower::http {
namespace {

using nlohmann::json;

json ref(const char* name) { return {{"$ref", std::string("#/components/schemas/") + name}}; }

json json_body(const json& schema) { return {{"content", {{"application/json", {{"schema", schema}}}}}}; }

json responses(int ok, const char* description, const json& schema) {
  json r = {{std::to_string(ok), {{"description", description}}},
            {"400", {{"description", "Validation failure"}, {"content", {{"application/json", {{"schema", ref("Error")}}}}}}},
            {"404", {{"description", "Unknown case or entity"}, {"content", {{"application/json", {{"schema", ref("Error")}}}}}}},
            {"409", {{"description", "Illegal state transition, closed case or closure blocked"},
                     {"content", {{"application/json", {{"schema", ref("Error")}}}}}}}};
  if (!schema.is_null()) r[std::to_string(ok)]["content"] = {{"application/json", {{"schema", schema}}}};
  return r;
}

json case_param() {
  return {{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
}

json sub_param(const char* name) {
  return {{"name", name}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
}

json object_schema(std::initializer_list<std::pair<const char*, const char*>> fields,
                   std::initializer_list<const char*> required) {
  json props = json::object();
  for (const auto& [name, type] : fields) {
    if (std::string(type) == "ids") {
      props[name] = {{"type", "array"}, {"items", {{"type", "string"}}}};
    } else if (std::string(type) == "timestamp") {
      props[name] = {{"type", "string"}, {"format", "date-time"}};
    } else {
      props[name] = {{"type", type}};
    }
  }
  json s = {{"type", "object"}, {"properties", props}};
  if (required.size() > 0) {
    json req = json::array();
    for (const char* r : required) req.push_back(r);
    s["required"] = req;
  }
  return s;
}

json mutation(const char* summary, const json& body, int ok = 201) {
  return {{"summary", summary},
          {"parameters", json::array({case_param()})},
          {"requestBody", json_body(body)},
          {"responses", responses(ok, "Mutation applied; body carries the new journal seq", ref("Mutation"))}};
}

json build() {
  json paths = json::object();
  paths["/cases"] = {
      {"get", {{"summary", "List case ids"}, {"responses", responses(200, "Case ids", nullptr)}}},
      {"post",
       {{"summary", "Open a case"},
        {"requestBody", json_body(object_schema({{"name", "string"}, {"attacker_label", "string"}, {"opened_at", "timestamp"}},
                                                {"name"}))},
        {"responses", responses(201, "Case created", ref("Mutation"))}}}};
  paths["/cases/{id}"] = {{"get",
                           {{"summary", "Materialized case in flowercase/1 form plus seq"},
                            {"parameters", json::array({case_param()})},
                            {"responses", responses(200, "Case document", nullptr)}}}};
  paths["/cases/{id}/attacker"] = {
      {"post", mutation("Annotate the attacker node", object_schema({{"label", "string"}, {"info_gathering_notes", "string"}}, {"label"}), 200)}};
  paths["/cases/{id}/targets"] = {
      {"post", mutation("Add a target", object_schema({{"label", "string"}, {"first_seen", "timestamp"}, {"notes", "string"}},
                                                      {"label", "first_seen"}))}};
  paths["/cases/{id}/edges"] = {
      {"post", mutation("Record an initial compromise (no source) or a move (with source)",
                        object_schema({{"kind", "string"}, {"source", "string"}, {"dest", "string"}, {"at", "timestamp"},
                                       {"vector", "string"}, {"technique", "string"}, {"evidence", "ids"}},
                                      {"dest", "at"}))}};
  paths["/cases/{id}/actions"] = {
      {"post", mutation("Record a non-move action leaf",
                        object_schema({{"target", "string"}, {"kind", "string"}, {"observed_from", "timestamp"},
                                       {"observed_to", "timestamp"}, {"description", "string"}, {"technique", "string"},
                                       {"evidence", "ids"}},
                                      {"target", "kind", "observed_from", "description"}))}};
  paths["/cases/{id}/questions"] = {
      {"post", mutation("Pose a question", object_schema({{"scope", "string"}, {"text", "string"}, {"spawned_from", "string"}}, {"text"}))}};
  paths["/cases/{id}/questions/{qid}/answer"] = {
      {"post", mutation("Answer a question with a verified hypothesis", object_schema({{"hypothesis", "string"}}, {"hypothesis"}), 200)}};
  paths["/cases/{id}/questions/{qid}/withdraw"] = {{"post", mutation("Withdraw a question", object_schema({}, {}), 200)}};
  paths["/cases/{id}/collection-steps"] = {
      {"post", mutation("Plan a collection step", object_schema({{"question", "string"}, {"category", "string"},
                                                                 {"source_description", "string"}},
                                                                {"question", "category", "source_description"}))}};
  paths["/cases/{id}/collection-steps/{sid}/attach"] = {
      {"post", mutation("Mark a step done with its collected evidence", object_schema({{"evidence", "ids"}}, {}), 200)}};
  paths["/cases/{id}/hypotheses"] = {
      {"post", mutation("Propose a hypothesis", object_schema({{"question", "string"}, {"statement", "string"}, {"supporting", "ids"}},
                                                              {"question", "statement"}))}};
  const json check_body = object_schema({{"description", "string"}, {"outcome", "string"}, {"evidence", "ids"}, {"at", "timestamp"}},
                                        {"description", "outcome"});
  paths["/cases/{id}/hypotheses/{hid}/checks"] = {{"post", mutation("Record a verification check", check_body)}};
  paths["/hypotheses/{hid}/checks"] = {{"post",
                                        {{"summary", "Record a verification check (case located by hypothesis id)"},
                                         {"parameters", json::array({sub_param("hid")})},
                                         {"requestBody", json_body(check_body)},
                                         {"responses", responses(201, "Check recorded", ref("Mutation"))}}}};
  paths["/cases/{id}/filters"] = {
      {"post", mutation("Evaluate and journal an evidence filter", object_schema({{"expression", "object"}, {"question", "string"}}, {"expression"}), 200)}};
  paths["/cases/{id}/iterations"] = {
      {"post", mutation("Open a new investigation iteration", object_schema({{"trigger", "string"}, {"at", "timestamp"}}, {"trigger"}))}};
  paths["/cases/{id}/close"] = {{"post", mutation("Close the case", object_schema({{"at", "timestamp"}}, {}), 200)}};
  const json upload = {{"content",
                        {{"multipart/form-data",
                          {{"schema", object_schema({{"case", "string"}, {"step", "string"}, {"file", "string"},
                                                     {"description", "string"}, {"category", "string"},
                                                     {"source_target", "string"}, {"acquired_at", "timestamp"},
                                                     {"signing_key", "string"}},
                                                    {"step", "file"})}}}}}};
  paths["/evidence"] = {{"post",
                         {{"summary", "Ingest evidence bytes against a collection step"},
                          {"requestBody", upload},
                          {"responses", responses(201, "Evidence item and custody entry", ref("Mutation"))}}}};
  paths["/cases/{id}/evidence"] = {{"post",
                                    {{"summary", "Ingest evidence bytes against a collection step"},
                                     {"parameters", json::array({case_param()})},
                                     {"requestBody", upload},
                                     {"responses", responses(201, "Evidence item and custody entry", ref("Mutation"))}}}};
  paths["/cases/{id}/evidence/{eid}/verify"] = {{"post", mutation("Verify a stored blob", object_schema({}, {}), 200)}};
  auto getter = [](const char* summary, const char* type) {
    return json{{"get",
                 {{"summary", summary},
                  {"parameters", json::array({case_param()})},
                  {"responses", {{"200", {{"description", summary}, {"content", {{type, json::object()}}}}},
                                 {"404", {{"description", "Unknown case"}}}}}}}};
  };
  paths["/cases/{id}/closure"] = getter("Closure blockers and warnings", "application/json");
  paths["/cases/{id}/graph.dot"] = getter("Graphviz rendering of the attack graph", "text/vnd.graphviz");
  paths["/cases/{id}/report.md"] = getter("CommonMark audit report", "text/markdown");
  paths["/cases/{id}/timeline"] = getter("Edges and leaves ordered by time", "application/json");
  paths["/cases/{id}/events"] = getter("Journal events with seq > since; waits up to timeout ms when none", "application/json");
  paths["/cases/{id}/events"]["get"]["parameters"].push_back(
      {{"name", "since"}, {"in", "query"}, {"schema", {{"type", "integer"}, {"minimum", 0}}}});
  paths["/cases/{id}/events"]["get"]["parameters"].push_back(
      {{"name", "timeout"}, {"in", "query"}, {"schema", {{"type", "integer"}, {"minimum", 0}}}});
  paths["/cases/{id}/report.md"]["get"]["parameters"].push_back(
      {{"name", "generated_at"}, {"in", "query"}, {"schema", {{"type", "string"}, {"format", "date-time"}}}});

  json schemas = {
      {"Error", object_schema({{"error", "string"}, {"detail", "string"}, {"data", "object"}}, {"error", "detail"})},
      {"Mutation", {{"type", "object"}, {"properties", {{"seq", {{"type", "integer"}}}}}, {"required", {"seq"}}}},
  };
  return {{"openapi", "3.0.3"},
          {"info", {{"title", "flower case service"}, {"version", "0.1.0"}}},
          {"paths", paths},
          {"components", {{"schemas", schemas}}}};
}

}  // namespace

const nlohmann::json& openapi() {
  static const nlohmann::json doc = build();
  return doc;
}

}  // namespace flower::http
