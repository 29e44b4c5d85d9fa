#pragma once

#include "flower/error.hpp"
#include "flower/session.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace flower::http {

struct ServiceOptions {
  std::filesystem::path root = "cases";
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 8080;
  bool allow_remote = false;
  // Static workbench assets served under /ui/.
  std::optional<std::filesystem::path> ui_dir;
  // PEM file used for custody signatures when a request supplies none.
  std::optional<std::filesystem::path> key_file;
  std::string actor = "service";
  SessionOptions session;
  std::chrono::milliseconds max_poll{30000};
};

// JSON-over-HTTP adapter over a case workspace. Mutations on one case are
// serialized and take the case's journal lock, so CLI writers can run
// alongside; reads resynchronize from the journal file first.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Returns the bound port. Throws Error{ValidationError} for a non-loopback
  // host without allow_remote and Error{IoError} when binding fails.
  int bind();
  // Serves until stop(). Requires bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int status_for(ErrorKind kind) noexcept;
bool is_loopback(const std::string& host) noexcept;
const nlohmann::json& openapi();

}  // namespace flower::http
