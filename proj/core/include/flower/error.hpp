#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace flower {

enum class ErrorKind {
  EmptyName,
  ValidationError,
  CaseClosed,
  NotFound,
  DanglingEvidenceRef,
  SelfMove,
  TemporalViolation,
  UseRecordMove,
  InvalidState,
  NotProven,
  Mismatch,
  ClosureBlocked,
  SigningError,
  StorageError,
  BlobMissing,
  ManifestTampered,
  UnknownEventKind,
  NoGenesis,
  JournalTampered,
  UnsupportedSchema,
  UnsupportedFormat,
  IoError,
  CustodyTampered,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Domain error raised by every flower operation. `data` carries structured
// context (e.g. the closure report behind ClosureBlocked).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail, nlohmann::json data = nullptr);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  const nlohmann::json& data() const noexcept { return data_; }

  // {"error": kind, "detail": ..., ["data": ...]}
  nlohmann::json to_json() const;

 private:
  ErrorKind kind_;
  std::string detail_;
  nlohmann::json data_;
};

}  // namespace flower
