#pragma once

#include "flower/chain.hpp"
#include "flower/crypto.hpp"
#include "flower/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flower {

// Content-addressed blob storage. Layout on disk:
// <root>/<first two hash hex>/<hash>.
class BlobStore {
 public:
  virtual ~BlobStore() = default;

  // Stores bytes under their SHA-256; storing identical bytes twice keeps a
  // single blob. Returns the hash. Throws Error{StorageError}.
  virtual std::string put(std::span<const std::uint8_t> bytes) = 0;
  virtual std::optional<Bytes> get(const std::string& hash) const = 0;
  virtual std::size_t blob_count() const = 0;

  static std::string relative_path(const std::string& hash);
};

class FileBlobStore final : public BlobStore {
 public:
  explicit FileBlobStore(std::filesystem::path root);

  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  std::size_t blob_count() const override;

  std::filesystem::path path_for(const std::string& hash) const;
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

class MemoryBlobStore final : public BlobStore {
 public:
  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  std::size_t blob_count() const override { return blobs_.size(); }

  // Direct access for tamper simulation.
  Bytes* mutable_blob(const std::string& hash);
  void erase(const std::string& hash) { blobs_.erase(hash); }

 private:
  std::map<std::string, Bytes> blobs_;
};

enum class VerifyStatus { Ok, Mismatch, BlobMissing };

std::string_view to_string(VerifyStatus s) noexcept;

struct VerificationResult {
  EvidenceId evidence;
  VerifyStatus status = VerifyStatus::Ok;
  std::string expected;
  // Empty when the blob is missing.
  std::string actual;

  nlohmann::json to_json() const;
};

// Recomputes the blob hash; read-only.
VerificationResult verify_blob(const BlobStore& store, const EvidenceItem& item);

// SHA-256 over the canonical entry without entry_hash and signature.
std::string custody_entry_hash(const CustodyEntry& entry);

// Builds, hashes and signs the next entry of `chain`.
CustodyEntry make_custody_entry(const std::vector<CustodyEntry>& chain, const EvidenceId& evidence,
                                CustodyAction action, std::string actor, Timestamp at,
                                const SigningKey& key);

// Walks the chain in order: hash link, entry hash, then signature against
// the registered key of signer_key_id.
ChainResult verify_chain(const std::vector<CustodyEntry>& chain,
                         const std::map<std::string, SignerKey>& keys);
ChainResult verify_chain(const Case& c);

inline constexpr std::string_view kManifestSchema = "flowermanifest/1";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kManifestSidecar = "manifest.json.sha256";

// Court-handover bundle: every item, the full custody chain and the signer
// public keys.
struct Manifest {
  CaseId case_id;
  std::vector<EvidenceItem> items;
  std::vector<CustodyEntry> custody;
  std::vector<SignerKey> signer_keys;

  bool operator==(const Manifest&) const = default;
};

Manifest build_manifest(const Case& c);
// Canonical JSON followed by a single LF.
std::string render_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);

// Writes manifest.json and manifest.json.sha256 ("<hex>\n") into dir.
void write_manifest(const Manifest& m, const std::filesystem::path& dir);
// Throws Error{ManifestTampered} when the sidecar does not match.
Manifest read_manifest(const std::filesystem::path& dir);

}  // namespace flower
