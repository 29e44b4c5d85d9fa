#include "service.hpp"

#include "ops.hpp"

#include "flower/crypto.hpp"
#include "flower/report.hpp"
#include "flower/workspace.hpp"

#include <httplib.h>

#include <condition_variable>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace flower::http {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
constexpr std::chrono::milliseconds kPollSlice{200};

struct CaseHandle {
  std::mutex mutex;
  std::condition_variable changed;
  std::optional<Session> session;
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump() + "\n", kJson);
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, e.to_json(), status_for(e.kind())); }

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorKind::ValidationError, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("request body is not JSON: ") + e.what());
  }
}

std::string actor_of(const httplib::Request& req, const json& body, const std::string& fallback) {
  if (auto it = body.find("actor"); it != body.end() && it->is_string() && !it->get<std::string>().empty()) {
    return it->get<std::string>();
  }
  if (req.has_header("X-Flower-Actor")) return req.get_header_value("X-Flower-Actor");
  return fallback;
}

std::uint64_t uint_param(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  std::size_t pos = 0;
  try {
    const auto n = std::stoull(v, &pos);
    if (pos == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::ValidationError, std::string("query parameter '") + name + "' must be a non-negative integer");
}

}  // namespace

int status_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotFound:
    case ErrorKind::BlobMissing:
      return 404;
    case ErrorKind::InvalidState:
    case ErrorKind::ClosureBlocked:
    case ErrorKind::CaseClosed:
    case ErrorKind::NotProven:
      return 409;
    case ErrorKind::StorageError:
    case ErrorKind::IoError:
    case ErrorKind::JournalTampered:
    case ErrorKind::CustodyTampered:
    case ErrorKind::NoGenesis:
      return 500;
    default:
      return 400;
  }
}

bool is_loopback(const std::string& host) noexcept {
  return host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)), workspace(options.root, options.session) {}

  ServiceOptions options;
  Workspace workspace;
  httplib::Server server;
  std::optional<SigningKey> server_key;
  std::mutex registry_mutex;
  std::map<CaseId, std::unique_ptr<CaseHandle>> handles;
  bool bound = false;

  CaseHandle& handle(const CaseId& id) {
    std::lock_guard lock(registry_mutex);
    auto& slot = handles[id];
    if (!slot) {
      if (!workspace.exists(id)) {
        handles.erase(id);
        throw Error(ErrorKind::NotFound, "no such case: " + id.str(), {{"id", id.str()}});
      }
      slot = std::make_unique<CaseHandle>();
    }
    return *slot;
  }

  CaseHandle& handle(const std::string& text) { return handle(parse_case_id(text)); }

  static CaseId parse_case_id(const std::string& text) {
    try {
      return CaseId(text);
    } catch (const Error&) {
      throw Error(ErrorKind::NotFound, "no such case: " + text, {{"id", text}});
    }
  }

  // Caller holds h.mutex.
  Session& session(CaseHandle& h, const CaseId& id) {
    if (!h.session) {
      h.session.emplace(workspace.open(id));
    } else {
      h.session->sync();
    }
    return *h.session;
  }

  template <class Fn>
  auto read(const std::string& case_text, Fn&& fn) {
    const CaseId id = parse_case_id(case_text);
    CaseHandle& h = handle(id);
    std::lock_guard lock(h.mutex);
    return fn(session(h, id));
  }

  template <class Fn>
  json mutate(const CaseId& id, Fn&& fn) {
    CaseHandle& h = handle(id);
    json out;
    {
      std::lock_guard lock(h.mutex);
      auto file_lock = workspace.lock(id);
      out = fn(session(h, id));
    }
    h.changed.notify_all();
    return out;
  }

  ops::Context context(const std::string& actor, const SigningKey* key) {
    ops::Context c{actor, key ? key : (server_key ? &*server_key : nullptr), options.session.clock};
    return c;
  }

  void route_op(const std::string& pattern, std::string op, int status = 201,
                std::function<void(const httplib::Request&, json&)> enrich = {}) {
    server.Post(pattern, [this, op = std::move(op), status, enrich](const httplib::Request& req,
                                                                   httplib::Response& res) {
      json body = parse_body(req);
      if (enrich) enrich(req, body);
      const std::string actor = actor_of(req, body, options.actor);
      const CaseId id = parse_case_id(req.matches[1]);
      send_json(res, mutate(id, [&](Session& s) { return ops::run(s, op, body, context(actor, nullptr)); }),
                status);
    });
  }

  std::optional<CaseId> owner_of_hypothesis(const HypothesisId& hid) {
    for (const auto& id : workspace.cases()) {
      const bool found = read(id.str(), [&](Session& s) { return s.state().hypotheses.contains(hid); });
      if (found) return id;
    }
    return std::nullopt;
  }

  void evidence_upload(const httplib::Request& req, httplib::Response& res, std::optional<std::string> case_text) {
    if (!req.is_multipart_form_data()) {
      throw Error(ErrorKind::ValidationError, "evidence upload must be multipart/form-data");
    }
    if (!req.has_file("file")) throw Error(ErrorKind::ValidationError, "missing multipart part 'file'");
    json params = json::object();
    for (const char* field : {"case", "step", "description", "category", "source_target", "acquired_at", "actor"}) {
      if (req.has_file(field)) params[field] = req.get_file_value(field).content;
    }
    if (!case_text) {
      if (!params.contains("case")) throw Error(ErrorKind::ValidationError, "missing multipart part 'case'");
      case_text = params["case"].get<std::string>();
    }
    std::optional<SigningKey> request_key;
    if (req.has_file("signing_key")) request_key = SigningKey::from_pem(req.get_file_value("signing_key").content);
    const std::string& content = req.get_file_value("file").content;
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(content.data()),
                                              content.size());
    const std::string actor = actor_of(req, params, options.actor);
    const CaseId id = parse_case_id(*case_text);
    send_json(res,
              mutate(id, [&](Session& s) {
                return ops::ingest(s, bytes, params, context(actor, request_key ? &*request_key : nullptr));
              }),
              201);
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    const CaseId id = parse_case_id(req.matches[1]);
    const std::uint64_t since = uint_param(req, "since", 0);
    const auto timeout = std::min<std::chrono::milliseconds>(
        std::chrono::milliseconds(uint_param(req, "timeout", 25000)), options.max_poll);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    CaseHandle& h = handle(id);
    std::unique_lock lock(h.mutex);
    Session* s = &session(h, id);
    while (s->last_seq() <= since && std::chrono::steady_clock::now() < deadline) {
      h.changed.wait_for(lock, std::min<std::chrono::nanoseconds>(kPollSlice, deadline - std::chrono::steady_clock::now()));
      s = &session(h, id);
    }
    json list = json::array();
    for (const auto& e : s->journal().events()) {
      if (e.seq > since) list.push_back(to_json(e));
    }
    send_json(res, {{"events", std::move(list)}, {"seq", s->last_seq()}});
  }

  void install_routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, {{"error", "InternalError"}, {"detail", e.what()}}, 500);
      }
    });

    server.Get("/openapi.json", [](const httplib::Request&, httplib::Response& res) { send_json(res, openapi()); });

    server.Get("/cases", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& id : workspace.cases()) list.push_back(id);
      send_json(res, {{"cases", list}});
    });

    server.Post("/cases", [this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      auto name = body.find("name");
      if (name == body.end() || !name->is_string()) throw Error(ErrorKind::EmptyName, "case name is required");
      const std::string actor = actor_of(req, body, options.actor);
      Timestamp opened = options.session.clock();
      if (auto at = body.find("opened_at"); at != body.end() && at->is_string()) {
        opened = Timestamp::parse(at->get<std::string>());
      }
      std::optional<std::string> label;
      if (auto l = body.find("attacker_label"); l != body.end() && l->is_string()) label = l->get<std::string>();
      std::lock_guard lock(registry_mutex);
      Session s = workspace.create(name->get<std::string>(), opened, actor, label);
      send_json(res, {{"id", s.state().id}, {"name", s.state().name}, {"seq", s.last_seq()}}, 201);
    });

    server.Get(R"(/cases/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, read(req.matches[1], [](Session& s) {
                  json j = case_to_json(s.state());
                  j["seq"] = s.last_seq();
                  return j;
                }));
    });

    route_op(R"(/cases/([^/]+)/attacker)", "annotate_attacker", 200);
    route_op(R"(/cases/([^/]+)/targets)", "add_target");
    server.Post(R"(/cases/([^/]+)/edges)", [this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      const bool is_move = body.contains("source") && !body["source"].is_null();
      if (auto k = body.find("kind"); k != body.end() && k->is_string()) {
        const auto kind = parse_enum<EdgeKind>(k->get<std::string>());
        if ((kind == EdgeKind::Move) != is_move) {
          throw Error(ErrorKind::ValidationError, "move edges need a source; initial compromise edges must not have one");
        }
      }
      const std::string actor = actor_of(req, body, options.actor);
      const CaseId id = parse_case_id(req.matches[1]);
      send_json(res, mutate(id, [&](Session& s) {
                  return ops::run(s, is_move ? "record_move" : "record_initial_compromise", body,
                                  context(actor, nullptr));
                }),
                201);
    });
    route_op(R"(/cases/([^/]+)/actions)", "record_action");
    route_op(R"(/cases/([^/]+)/questions)", "pose_question");
    auto with_match = [](const char* key) {
      return [key](const httplib::Request& req, json& body) { body[key] = req.matches[2]; };
    };
    route_op(R"(/cases/([^/]+)/questions/([^/]+)/answer)", "answer_question", 200, with_match("question"));
    route_op(R"(/cases/([^/]+)/questions/([^/]+)/withdraw)", "withdraw_question", 200, with_match("question"));
    route_op(R"(/cases/([^/]+)/collection-steps)", "plan_collection");
    route_op(R"(/cases/([^/]+)/collection-steps/([^/]+)/attach)", "attach_collected", 200, with_match("step"));
    route_op(R"(/cases/([^/]+)/hypotheses)", "propose_hypothesis");
    route_op(R"(/cases/([^/]+)/hypotheses/([^/]+)/checks)", "record_check", 201, with_match("hypothesis"));
    route_op(R"(/cases/([^/]+)/filters)", "apply_filter", 200);
    route_op(R"(/cases/([^/]+)/iterations)", "open_iteration");
    route_op(R"(/cases/([^/]+)/close)", "close_case", 200);

    server.Post(R"(/hypotheses/([^/]+)/checks)", [this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      body["hypothesis"] = req.matches[1];
      HypothesisId hid;
      try {
        hid = HypothesisId(req.matches[1]);
      } catch (const Error&) {
        throw Error(ErrorKind::NotFound, "no such hypothesis: " + std::string(req.matches[1]));
      }
      auto owner = owner_of_hypothesis(hid);
      if (!owner) throw Error(ErrorKind::NotFound, "no such hypothesis: " + hid.str(), {{"id", hid.str()}});
      const std::string actor = actor_of(req, body, options.actor);
      send_json(res, mutate(*owner, [&](Session& s) {
                  return ops::run(s, "record_check", body, context(actor, nullptr));
                }),
                201);
    });

    server.Post("/evidence", [this](const httplib::Request& req, httplib::Response& res) {
      evidence_upload(req, res, std::nullopt);
    });
    server.Post(R"(/cases/([^/]+)/evidence)", [this](const httplib::Request& req, httplib::Response& res) {
      evidence_upload(req, res, std::string(req.matches[1]));
    });
    server.Post(R"(/cases/([^/]+)/evidence/([^/]+)/verify)", [this](const httplib::Request& req,
                                                                   httplib::Response& res) {
      json body = parse_body(req);
      body["evidence"] = req.matches[2];
      const std::string actor = actor_of(req, body, options.actor);
      const CaseId id = parse_case_id(req.matches[1]);
      send_json(res, mutate(id, [&](Session& s) { return ops::run(s, "verify_item", body, context(actor, nullptr)); }));
    });

    server.Get(R"(/cases/([^/]+)/closure)", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, read(req.matches[1], [](Session& s) {
                  json j = s.closure_status().to_json();
                  j["seq"] = s.last_seq();
                  return j;
                }));
    });
    server.Get(R"(/cases/([^/]+)/graph\.dot)", [this](const httplib::Request& req, httplib::Response& res) {
      res.set_content(read(req.matches[1], [](Session& s) { return export_dot(s.state()); }),
                      "text/vnd.graphviz");
    });
    server.Get(R"(/cases/([^/]+)/report\.md)", [this](const httplib::Request& req, httplib::Response& res) {
      const Timestamp at = req.has_param("generated_at") ? Timestamp::parse(req.get_param_value("generated_at"))
                                                         : options.session.clock();
      res.set_content(read(req.matches[1], [&](Session& s) { return generate_report(s.state(), at); }),
                      "text/markdown; charset=utf-8");
    });
    server.Get(R"(/cases/([^/]+)/timeline)", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, read(req.matches[1], [](Session& s) {
                  json list = json::array();
                  for (const auto& t : timeline(s.state())) {
                    list.push_back({{"at", t.at}, {"id", t.id}, {"kind", t.kind}, {"target", t.target},
                                    {"summary", t.summary}});
                  }
                  return json{{"timeline", list}, {"seq", s.last_seq()}};
                }));
    });
    server.Get(R"(/cases/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      events(req, res);
    });

    if (options.ui_dir) {
      if (!server.set_mount_point("/ui", options.ui_dir->string())) {
        throw Error(ErrorKind::IoError, "cannot serve UI assets from " + options.ui_dir->string());
      }
      server.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->options.key_file) {
    std::ifstream in(*impl_->options.key_file);
    if (!in) throw Error(ErrorKind::IoError, "cannot read key file " + impl_->options.key_file->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    impl_->server_key.emplace(SigningKey::from_pem(buf.str()));
  }
  impl_->install_routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  const auto& o = impl_->options;
  if (!is_loopback(o.host)) {
    if (!o.allow_remote) {
      throw Error(ErrorKind::ValidationError, "refusing to bind non-loopback address " + o.host +
                                                  " without --allow-remote");
    }
    std::cerr << "warning: serving on " << o.host
              << " without authentication; anyone who can reach it can modify cases\n";
  }
  std::error_code ec;
  std::filesystem::create_directories(o.root, ec);
  int port = o.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw Error(ErrorKind::IoError, "cannot bind " + o.host);
  } else if (!impl_->server.bind_to_port(o.host, port)) {
    throw Error(ErrorKind::IoError, "cannot bind " + o.host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return port;
}

void Service::run() {
  if (!impl_->bound) throw Error(ErrorKind::InvalidState, "service is not bound");
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace flower::http
