#include "flower/error.hpp"

namespace flower {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyName: return "EmptyName";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::CaseClosed: return "CaseClosed";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::DanglingEvidenceRef: return "DanglingEvidenceRef";
    case ErrorKind::SelfMove: return "SelfMove";
    case ErrorKind::TemporalViolation: return "TemporalViolation";
    case ErrorKind::UseRecordMove: return "UseRecordMove";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NotProven: return "NotProven";
    case ErrorKind::Mismatch: return "Mismatch";
    case ErrorKind::ClosureBlocked: return "ClosureBlocked";
    case ErrorKind::SigningError: return "SigningError";
    case ErrorKind::StorageError: return "StorageError";
    case ErrorKind::BlobMissing: return "BlobMissing";
    case ErrorKind::ManifestTampered: return "ManifestTampered";
    case ErrorKind::UnknownEventKind: return "UnknownEventKind";
    case ErrorKind::NoGenesis: return "NoGenesis";
    case ErrorKind::JournalTampered: return "JournalTampered";
    case ErrorKind::UnsupportedSchema: return "UnsupportedSchema";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::CustodyTampered: return "CustodyTampered";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string detail, nlohmann::json data)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(std::move(detail)),
      data_(std::move(data)) {}

nlohmann::json Error::to_json() const {
  nlohmann::json out = {{"error", std::string(to_string(kind_))}, {"detail", detail_}};
  if (!data_.is_null()) {
    out["data"] = data_;
  }
  return out;
}

}  // namespace flower
