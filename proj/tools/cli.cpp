#include "cli.hpp"

#include "ops.hpp"
#include "service.hpp"

#include "flower/corpus.hpp"
#include "flower/crypto.hpp"
#include "flower/error.hpp"
#include "flower/journal.hpp"
#include "flower/report.hpp"
#include "flower/vault.hpp"
#include "flower/workspace.hpp"

#include <CLI11.hpp>

#include <sys/stat.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace flower::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::string> getenv_str(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, std::string_view data, bool private_file = false) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  if (private_file) ::chmod(p.c_str(), 0600);
}

struct Ctx {
  Env env;
  std::ostream& out;
  bool json_output = false;
  std::string home;
  std::string case_id;
  std::string actor;
  std::string key;

  SessionOptions options() const { return session_options(env); }
  Workspace workspace() const { return Workspace(home, options()); }

  CaseId require_case() const {
    if (case_id.empty()) throw UsageError("no case selected: pass --case or set FLOWER_CASE");
    return CaseId(case_id);
  }

  SigningKey load_key() const {
    if (key.empty()) throw Error(ErrorKind::SigningError, "no signing key: pass --key or set FLOWER_KEY");
    return SigningKey::from_pem(read_file(key));
  }

  ops::Context op_context(const SigningKey* k) const { return {actor, k, options().clock}; }

  void emit(const json& j, const std::string& plain) const {
    if (json_output) {
      out << j.dump() << "\n";
    } else if (!plain.empty()) {
      out << plain << (plain.back() == '\n' ? "" : "\n");
    }
  }
};

template <class Fn>
auto with_case(const Ctx& c, bool write, Fn&& fn) {
  Workspace ws = c.workspace();
  const CaseId id = c.require_case();
  std::unique_ptr<JournalLock> lock;
  if (write) lock = ws.lock(id);
  Session s = ws.open(id);
  return fn(s, ws.case_dir(id));
}

std::string plain_of(const json& result) {
  if (auto it = result.find("id"); it != result.end() && it->is_string()) return it->get<std::string>();
  if (auto it = result.find("result"); it != result.end() && it->is_array()) {
    std::string lines;
    for (const auto& id : *it) lines += id.get<std::string>() + "\n";
    return lines.empty() ? "(no matches)" : lines;
  }
  if (auto it = result.find("label"); it != result.end()) return it->get<std::string>();
  return result.dump();
}

// Table-driven commands that map flags straight onto ops::run parameters.
struct Field {
  enum Kind { Str, Ids, Json, Positional };
  const char* flag;
  const char* key;
  Kind kind;
  bool required;
  const char* help;
};

struct OpCommand {
  const char* group;
  const char* name;
  const char* op;
  const char* help;
  std::vector<Field> fields;
  bool needs_key = false;
};

const std::vector<OpCommand>& op_commands() {
  using F = Field;
  static const std::vector<OpCommand> table = {
      {"attacker", "set", "annotate_attacker", "Label the attacker node",
       {{"--label", "label", F::Str, true, "Attacker label"},
        {"--notes", "info_gathering_notes", F::Str, false, "Initial information gathering notes"}}},
      {"target", "add", "add_target", "Add a compromised target",
       {{"--label", "label", F::Str, true, "Host or account label"},
        {"--first-seen", "first_seen", F::Str, true, "RFC 3339 timestamp"},
        {"--notes", "notes", F::Str, false, "Free-form notes"}}},
      {"compromise", "add", "record_initial_compromise", "Record the attacker's initial compromise of a target",
       {{"--to", "dest", F::Str, true, "Target id"},
        {"--at", "at", F::Str, true, "RFC 3339 timestamp"},
        {"--vector", "vector", F::Str, true, "Compromise vector"},
        {"--evidence", "evidence", F::Ids, false, "Evidence ids"}}},
      {"move", "add", "record_move", "Record lateral movement between targets",
       {{"--from", "source", F::Str, true, "Source target id"},
        {"--to", "dest", F::Str, true, "Destination target id"},
        {"--at", "at", F::Str, true, "RFC 3339 timestamp"},
        {"--technique", "technique", F::Str, true, "Movement technique"},
        {"--evidence", "evidence", F::Ids, false, "Evidence ids"}}},
      {"action", "add", "record_action", "Record an action leaf on a target",
       {{"--target", "target", F::Str, true, "Target id"},
        {"--kind", "kind", F::Str, true,
         "escalate_privileges|maintain_access|information_gathering|actions_on_objective|cover_tracks"},
        {"--from", "observed_from", F::Str, true, "Start of the observed interval"},
        {"--to", "observed_to", F::Str, false, "End of the observed interval (defaults to --from)"},
        {"--description", "description", F::Str, true, "What was observed"},
        {"--technique", "technique", F::Str, false, "Technique label"},
        {"--evidence", "evidence", F::Ids, false, "Evidence ids"}}},
      {"question", "add", "pose_question", "Pose an investigation question",
       {{"--text", "text", F::Str, true, "Question text"},
        {"--target", "scope", F::Str, false, "Scope the question to a target (default: case-wide)"},
        {"--spawned-from", "spawned_from", F::Str, false, "Hypothesis that raised the question"}}},
      {"question", "answer", "answer_question", "Answer a question with a verified hypothesis",
       {{"question", "question", F::Positional, true, "Question id"},
        {"--hypothesis", "hypothesis", F::Str, true, "Verified hypothesis id"}}},
      {"question", "withdraw", "withdraw_question", "Withdraw a question",
       {{"question", "question", F::Positional, true, "Question id"}}},
      {"collect", "plan", "plan_collection", "Plan a collection step for a question",
       {{"--question", "question", F::Str, true, "Question id"},
        {"--category", "category", F::Str, true, "host|network|misc"},
        {"--source", "source_description", F::Str, true, "Data source"}}},
      {"collect", "attach", "attach_collected", "Mark a step done with the evidence it yielded",
       {{"step", "step", F::Positional, true, "Collection step id"},
        {"--evidence", "evidence", F::Ids, false, "Evidence ids (none records an empty yield)"}}},
      {"filter", "run", "apply_filter", "Evaluate an evidence filter and journal it",
       {{"--expr", "expression", F::Json, true, "Filter expression as JSON"},
        {"--question", "question", F::Str, false, "Question the filter serves"}}},
      {"hypothesis", "add", "propose_hypothesis", "Propose a hypothesis for a question",
       {{"--question", "question", F::Str, true, "Question id"},
        {"--statement", "statement", F::Str, true, "Hypothesis statement"},
        {"--supporting", "supporting", F::Ids, false, "Supporting evidence ids"}}},
      {"hypothesis", "check", "record_check", "Record a verification check",
       {{"hypothesis", "hypothesis", F::Positional, true, "Hypothesis id"},
        {"--outcome", "outcome", F::Str, true, "verified|refuted"},
        {"--description", "description", F::Str, true, "What was checked"},
        {"--evidence", "evidence", F::Ids, false, "Evidence examined"},
        {"--at", "at", F::Str, false, "Check time (defaults to now)"}}},
      {"iteration", "open", "open_iteration", "Open a new investigation iteration",
       {{"--trigger", "trigger", F::Str, true, "'new evidence' or 'new question'"},
        {"--at", "at", F::Str, false, "Iteration start (defaults to now)"}}},
      {"case", "close", "close_case", "Close the case once nothing blocks closure",
       {{"--at", "at", F::Str, false, "Closing time (defaults to now)"}}},
      {"key", "register", "register_key", "Register the --key public key with the case", {}, true},
  };
  return table;
}

struct Bound {
  const OpCommand* cmd;
  std::vector<std::string> scalars;
  std::vector<std::vector<std::string>> lists;
  std::vector<CLI::Option*> options;
};

json collect_params(const Bound& b) {
  json p = json::object();
  for (std::size_t i = 0; i < b.cmd->fields.size(); ++i) {
    const Field& f = b.cmd->fields[i];
    if (b.options[i]->count() == 0) continue;
    switch (f.kind) {
      case Field::Str:
      case Field::Positional:
        p[f.key] = b.scalars[i];
        break;
      case Field::Ids:
        p[f.key] = b.lists[i];
        break;
      case Field::Json:
        try {
          p[f.key] = json::parse(b.scalars[i]);
        } catch (const json::exception&) {
          throw Error(ErrorKind::ValidationError, std::string(f.flag) + " is not valid JSON");
        }
        break;
    }
  }
  return p;
}

CLI::App* group(CLI::App& app, std::map<std::string, CLI::App*>& groups, const std::string& name,
                const std::string& help) {
  auto& g = groups[name];
  if (!g) {
    g = app.add_subcommand(name, help);
    g->require_subcommand(1);
  }
  return g;
}

void print_closure(const Ctx& c, const Session& s) {
  const auto report = s.closure_status();
  json j = report.to_json();
  j["state"] = to_string(s.state().state);
  j["seq"] = s.last_seq();
  std::ostringstream plain;
  plain << "case " << s.state().id.str() << " state=" << to_string(s.state().state)
        << " closed_allowed=" << (report.closed_allowed ? "true" : "false") << "\n";
  for (const auto& q : report.unanswered_questions) plain << "unanswered_question " << q.str() << "\n";
  for (const auto& t : report.unresolved_origins) plain << "unresolved_origin " << t.str() << "\n";
  for (const auto& v : report.graph_violations) plain << "graph_violation " << v.rule << " " << v.entity << "\n";
  for (const auto& w : report.warnings) plain << "warning " << w.kind << " " << w.entity << "\n";
  c.emit(j, plain.str());
}

void write_or_print(const Ctx& c, const std::string& out_opt, const fs::path& default_path, const std::string& text) {
  if (out_opt == "-") {
    c.out << text;
    return;
  }
  const fs::path target = out_opt.empty() ? default_path : fs::path(out_opt);
  write_file(target, text);
  c.emit({{"path", target.string()}, {"sha256", sha256_hex(text)}}, target.string());
}

}  // namespace

Env Env::from_process() {
  Env env;
  if (auto v = getenv_str("FLOWER_HOME")) env.home = *v;
  env.case_id = getenv_str("FLOWER_CASE");
  if (auto v = getenv_str("FLOWER_ACTOR")) env.actor = *v;
  if (auto v = getenv_str("FLOWER_KEY")) env.key = *v;
  if (auto v = getenv_str("FLOWER_NOW")) env.now = Timestamp::try_parse(*v);
  if (auto v = getenv_str("FLOWER_ID_SEED")) {
    try {
      env.id_seed = std::stoull(*v);
    } catch (const std::exception&) {
      env.id_seed = std::nullopt;
    }
  }
  return env;
}

SessionOptions session_options(const Env& env) {
  SessionOptions o;
  if (env.now) {
    const Timestamp fixed = *env.now;
    o.clock = [fixed] { return fixed; };
  }
  if (env.id_seed) o.ids = IdGenerator::seeded(*env.id_seed);
  return o;
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Env& env) {
  Ctx c{env, out, false, env.home.string(), env.case_id.value_or(""), env.actor,
        env.key ? env.key->string() : std::string()};

  CLI::App app{"Forensic case management over the flower attack model", "flower"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", c.json_output, "Machine-readable output");
  app.add_option("--home", c.home, "Case root directory (FLOWER_HOME, default ./cases)");
  app.add_option("--case", c.case_id, "Case id (FLOWER_CASE)");
  app.add_option("--actor", c.actor, "Actor recorded in the journal (FLOWER_ACTOR)");
  app.add_option("--key", c.key, "Ed25519 PEM private key for custody signatures (FLOWER_KEY)");

  std::function<void()> action;
  std::map<std::string, CLI::App*> groups;

  // Generic op commands. Storage must outlive parsing.
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& cmd : op_commands()) {
    CLI::App* g = group(app, groups, cmd.group, std::string("Manage ") + cmd.group);
    CLI::App* sub = g->add_subcommand(cmd.name, cmd.help);
    auto b = std::make_unique<Bound>();
    b->cmd = &cmd;
    b->scalars.resize(cmd.fields.size());
    b->lists.resize(cmd.fields.size());
    for (std::size_t i = 0; i < cmd.fields.size(); ++i) {
      const Field& f = cmd.fields[i];
      CLI::Option* o = f.kind == Field::Ids ? sub->add_option(f.flag, b->lists[i], f.help)
                                            : sub->add_option(f.flag, b->scalars[i], f.help);
      if (f.required) o->required();
      b->options.push_back(o);
    }
    Bound* raw = b.get();
    sub->callback([&c, &action, raw] {
      action = [&c, raw] {
        const json params = collect_params(*raw);
        const json result = with_case(c, true, [&](Session& s, const fs::path&) {
          std::optional<SigningKey> key;
          if (raw->cmd->needs_key) key.emplace(c.load_key());
          return ops::run(s, raw->cmd->op, params, c.op_context(key ? &*key : nullptr));
        });
        c.emit(result, plain_of(result));
      };
    });
    bound.push_back(std::move(b));
  }

  // case new | list | status | show
  CLI::App* case_group = group(app, groups, "case", "Manage cases");
  std::string case_name, attacker_label, opened_at;
  CLI::App* case_new = case_group->add_subcommand("new", "Open a new case");
  case_new->add_option("--name", case_name, "Case name")->required();
  auto* attacker_opt = case_new->add_option("--attacker", attacker_label, "Attacker label");
  auto* opened_opt = case_new->add_option("--opened-at", opened_at, "Opening time (defaults to now)");
  case_new->callback([&] {
    action = [&] {
      Workspace ws = c.workspace();
      const Timestamp at = opened_opt->count() ? Timestamp::parse(opened_at) : c.options().clock();
      std::optional<std::string> label;
      if (attacker_opt->count()) label = attacker_label;
      Session s = ws.create(case_name, at, c.actor, label);
      c.emit({{"id", s.state().id}, {"name", s.state().name}, {"seq", s.last_seq()}}, s.state().id.str());
    };
  });
  case_group->add_subcommand("list", "List case ids")->callback([&] {
    action = [&] {
      json ids = json::array();
      std::string plain;
      for (const auto& id : c.workspace().cases()) {
        ids.push_back(id);
        plain += id.str() + "\n";
      }
      c.emit({{"cases", ids}}, plain);
    };
  });
  case_group->add_subcommand("status", "Closure blockers and warnings")->callback([&] {
    action = [&] { with_case(c, false, [&](Session& s, const fs::path&) { print_closure(c, s); }); };
  });
  case_group->add_subcommand("show", "Print the case in flowercase/1 form")->callback([&] {
    action = [&] {
      with_case(c, false, [&](Session& s, const fs::path&) { c.out << export_case_json(s.state()); });
    };
  });

  // evidence ingest | verify | export | show | chain
  CLI::App* ev_group = group(app, groups, "evidence", "Evidence vault");
  std::string ev_file, ev_step, ev_desc, ev_category, ev_target, ev_acquired;
  CLI::App* ingest = ev_group->add_subcommand("ingest", "Ingest a file against a planned collection step");
  ingest->add_option("file", ev_file, "File to ingest")->required();
  ingest->add_option("--step", ev_step, "Collection step id")->required();
  ingest->add_option("--description", ev_desc, "Description");
  auto* cat_opt = ingest->add_option("--category", ev_category, "host|network|misc (defaults to the step's)");
  auto* tgt_opt = ingest->add_option("--target", ev_target, "Source target id");
  auto* acq_opt = ingest->add_option("--acquired-at", ev_acquired, "Acquisition time (defaults to now)");
  ingest->callback([&] {
    action = [&] {
      const std::string data = read_file(ev_file);
      json params = {{"step", ev_step}, {"description", ev_desc}};
      if (cat_opt->count()) params["category"] = ev_category;
      if (tgt_opt->count()) params["source_target"] = ev_target;
      if (acq_opt->count()) params["acquired_at"] = ev_acquired;
      const SigningKey key = c.load_key();
      const json result = with_case(c, true, [&](Session& s, const fs::path&) {
        const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
        return ops::ingest(s, bytes, params, c.op_context(&key));
      });
      c.emit(result, result["id"].get<std::string>());
    };
  });

  std::vector<std::string> verify_ids;
  CLI::App* verify = ev_group->add_subcommand("verify", "Re-hash stored blobs (all items when no ids are given)");
  verify->add_option("ids", verify_ids, "Evidence ids");
  verify->callback([&] {
    action = [&] {
      const SigningKey key = c.load_key();
      with_case(c, true, [&](Session& s, const fs::path&) {
        std::vector<EvidenceId> targets;
        if (verify_ids.empty()) {
          for (const auto& [id, _] : s.state().evidence) targets.push_back(id);
        } else {
          for (const auto& id : verify_ids) targets.emplace_back(id);
        }
        json results = json::array();
        std::string plain;
        std::optional<ErrorKind> failure;
        for (const auto& id : targets) {
          json r;
          try {
            const auto v = s.verify_item(id, c.actor, key);
            r = {{"evidence", id}, {"status", to_string(v.status)}, {"expected", v.expected}, {"actual", v.actual}};
            if (v.status != VerifyStatus::Ok && !failure) failure = ErrorKind::Mismatch;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::BlobMissing) throw;
            r = {{"evidence", id}, {"status", to_string(VerifyStatus::BlobMissing)}};
            if (!failure) failure = ErrorKind::BlobMissing;
          }
          plain += id.str() + " " + r["status"].get<std::string>() + "\n";
          results.push_back(std::move(r));
        }
        c.emit({{"results", results}, {"seq", s.last_seq()}}, plain.empty() ? "(no evidence)" : plain);
        if (failure) throw Error(*failure, "evidence failed verification", results);
      });
    };
  });

  std::string export_id, export_out;
  CLI::App* ev_export = ev_group->add_subcommand("export", "Copy a blob out of the vault (custody: exported)");
  ev_export->add_option("id", export_id, "Evidence id")->required();
  ev_export->add_option("--out", export_out, "Destination file")->required();
  ev_export->callback([&] {
    action = [&] {
      const SigningKey key = c.load_key();
      with_case(c, true, [&](Session& s, const fs::path&) {
        const Bytes bytes = s.export_evidence(EvidenceId(export_id), c.actor, key);
        write_file(export_out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        c.emit({{"path", export_out}, {"sha256", sha256_hex(bytes)}, {"seq", s.last_seq()}}, export_out);
      });
    };
  });

  std::string show_id;
  CLI::App* ev_show = ev_group->add_subcommand("show", "Show item metadata after reading the blob (custody: accessed)");
  ev_show->add_option("id", show_id, "Evidence id")->required();
  ev_show->callback([&] {
    action = [&] {
      const SigningKey key = c.load_key();
      with_case(c, true, [&](Session& s, const fs::path&) {
        const EvidenceId id(show_id);
        s.access_evidence(id, c.actor, key);
        json j = to_json(s.state().evidence.at(id));
        j["seq"] = s.last_seq();
        c.emit(j, j.dump(2));
      });
    };
  });

  ev_group->add_subcommand("chain", "Verify the custody chain")->callback([&] {
    action = [&] {
      with_case(c, false, [&](Session& s, const fs::path&) {
        const ChainResult r = s.verify_chain();
        if (!r.ok()) throw Error(ErrorKind::CustodyTampered, r.first_break->message, r.to_json());
        c.emit(r.to_json(), "ok " + std::to_string(s.state().custody.size()) + " entries");
      });
    };
  });

  // key gen
  std::string key_out;
  CLI::App* key_gen = group(app, groups, "key", "Signing keys")->add_subcommand("gen", "Generate an Ed25519 key");
  key_gen->add_option("--out", key_out, "PEM destination (must not exist)")->required();
  key_gen->callback([&] {
    action = [&] {
      if (fs::exists(key_out)) throw Error(ErrorKind::IoError, "refusing to overwrite " + key_out);
      const SigningKey key = SigningKey::generate();
      write_file(key_out, key.to_pem(), true);
      c.emit({{"key_id", key.key_id()}, {"public_key", key.public_key()}, {"path", key_out}}, key.key_id());
    };
  });

  // journal verify | replay
  CLI::App* journal_group = group(app, groups, "journal", "Case journal");
  journal_group->add_subcommand("verify", "Verify the journal hash chain")->callback([&] {
    action = [&] {
      const fs::path file = c.workspace().case_dir(c.require_case()) / kJournalFile;
      if (!fs::exists(file)) throw Error(ErrorKind::NotFound, "no such case: " + c.case_id);
      const auto lines = read_journal_lines(file);
      const ChainResult r = verify_journal_lines(lines);
      if (!r.ok()) throw Error(ErrorKind::JournalTampered, r.first_break->message, r.to_json());
      c.emit(r.to_json(), "ok " + std::to_string(lines.size()) + " events");
    };
  });
  journal_group->add_subcommand("replay", "Rebuild the case from its journal and write state.sha256")->callback([&] {
    action = [&] {
      const fs::path dir = c.workspace().case_dir(c.require_case());
      if (!fs::exists(dir / kJournalFile)) throw Error(ErrorKind::NotFound, "no such case: " + c.case_id);
      std::vector<JournalEvent> events;
      for (const auto& line : read_journal_lines(dir / kJournalFile)) {
        try {
          events.push_back(journal_event_from_json(json::parse(line)));
        } catch (const json::exception&) {
          throw Error(ErrorKind::JournalTampered, "unparseable journal line " + std::to_string(events.size() + 1),
                      {{"seq", events.size() + 1}});
        }
      }
      const std::string digest = state_digest(replay(events));
      write_file(dir / kDigestFile, digest + "\n");
      c.emit({{"digest", digest}, {"events", events.size()}}, digest);
    };
  });

  // report
  std::string report_out, generated_at;
  CLI::App* report = app.add_subcommand("report", "Write the audit report (report.md in the case directory)");
  report->add_option("--out", report_out, "Destination file, or - for stdout");
  auto* gen_opt = report->add_option("--generated-at", generated_at, "Report timestamp (defaults to now)");
  report->callback([&] {
    action = [&] {
      with_case(c, false, [&](Session& s, const fs::path& dir) {
        const Timestamp at = gen_opt->count() ? Timestamp::parse(generated_at) : c.options().clock();
        write_or_print(c, report_out, dir / kReportFile, generate_report(s.state(), at));
      });
    };
  });

  // export dot | json | manifest
  CLI::App* export_group = group(app, groups, "export", "Exports");
  std::string export_dest;
  for (const char* what : {"dot", "json", "manifest"}) {
    CLI::App* sub = export_group->add_subcommand(what, std::string("Export ") + what);
    if (std::string(what) != "manifest") sub->add_option("--out", export_dest, "Destination file, or - for stdout");
    sub->callback([&, kind = std::string(what)] {
      action = [&, kind] {
        with_case(c, false, [&](Session& s, const fs::path& dir) {
          if (kind == "dot") {
            write_or_print(c, export_dest, dir / kGraphFile, export_dot(s.state()));
          } else if (kind == "json") {
            write_or_print(c, export_dest, dir / kCaseFile, export_case_json(s.state()));
          } else {
            const Manifest m = build_manifest(s.state());
            write_manifest(m, dir);
            c.emit({{"path", (dir / "manifest.json").string()}, {"sha256", sha256_hex(render_manifest(m))}},
                   (dir / "manifest.json").string());
          }
        });
      };
    });
  }

  // timeline
  app.add_subcommand("timeline", "Edges and leaves ordered by time")->callback([&] {
    action = [&] {
      with_case(c, false, [&](Session& s, const fs::path&) {
        json list = json::array();
        std::string plain;
        for (const auto& t : timeline(s.state())) {
          list.push_back({{"at", t.at}, {"id", t.id}, {"kind", t.kind}, {"target", t.target}, {"summary", t.summary}});
          plain += t.at.to_string() + "  " + t.kind + "  " + t.summary + "\n";
        }
        c.emit({{"timeline", list}}, plain.empty() ? "(empty)" : plain);
      });
    };
  });

  // stats
  std::string stats_dir, stats_format = "csv";
  CLI::App* stats = app.add_subcommand("stats", "Multi-target and leaf-kind statistics over a corpus directory");
  stats->add_option("dir", stats_dir, "Directory of *.case.json files")->required();
  stats->add_option("--format", stats_format, "csv|md");
  stats->callback([&] {
    action = [&] {
      const LoadedCorpus corpus = load_corpus(stats_dir);
      const CorpusStats s = corpus_stats(corpus.cases);
      c.out << emit_stats(s, stats_format);
      if (!corpus.errors.empty()) {
        json errors = json::array();
        for (const auto& e : corpus.errors) errors.push_back({{"file", e.file}, {"message", e.message}});
        throw Error(ErrorKind::ValidationError, std::to_string(corpus.errors.size()) + " corpus file(s) rejected",
                    errors);
      }
    };
  });

  // serve
  http::ServiceOptions serve_opts;
  std::string bind_addr = "127.0.0.1:8080", ui_dir;
  CLI::App* serve = app.add_subcommand("serve", "Run the JSON-over-HTTP service");
  serve->add_option("--bind", bind_addr, "host:port (port 0 picks a free one)");
  serve->add_flag("--allow-remote", serve_opts.allow_remote, "Permit non-loopback binds");
  auto* ui_opt = serve->add_option("--ui", ui_dir, "Directory of workbench assets served under /ui/");
  serve->callback([&] {
    action = [&] {
      const auto colon = bind_addr.rfind(':');
      if (colon == std::string::npos) throw UsageError("--bind expects host:port");
      serve_opts.host = bind_addr.substr(0, colon);
      try {
        serve_opts.port = std::stoi(bind_addr.substr(colon + 1));
      } catch (const std::exception&) {
        throw UsageError("--bind expects host:port");
      }
      serve_opts.root = c.home;
      serve_opts.actor = c.actor;
      serve_opts.session = c.options();
      if (!c.key.empty()) serve_opts.key_file = c.key;
      if (ui_opt->count()) serve_opts.ui_dir = ui_dir;
      http::Service service(serve_opts);
      const int port = service.bind();
      c.out << "listening on http://" << serve_opts.host << ":" << port << std::endl;
      service.run();
    };
  });

  std::vector<const char*> argv{"flower"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!action) throw UsageError("no command given");
    action();
    return 0;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.to_json().dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"detail", e.what()}}.dump() << "\n";
    return 1;
  }
}

}  // namespace flower::cli
