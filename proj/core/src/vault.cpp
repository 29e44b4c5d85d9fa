#include "flower/vault.hpp"

#include "flower/canonical.hpp"
#include "flower/error.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

namespace flower {
namespace fs = std::filesystem;

namespace {

std::optional<Bytes> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::StorageError, "cannot write " + p.string());
}

}  // namespace

std::string BlobStore::relative_path(const std::string& hash) {
  return hash.substr(0, 2) + "/" + hash;
}

FileBlobStore::FileBlobStore(fs::path root) : root_(std::move(root)) {}

fs::path FileBlobStore::path_for(const std::string& hash) const {
  return root_ / hash.substr(0, 2) / hash;
}

std::string FileBlobStore::put(std::span<const std::uint8_t> bytes) {
  const std::string hash = sha256_hex(bytes);
  const fs::path target = path_for(hash);
  std::error_code ec;
  if (fs::exists(target, ec)) return hash;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw Error(ErrorKind::StorageError, "cannot create " + target.parent_path().string());
  // Write then rename so a crash never leaves a partial blob under its hash.
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::StorageError, "cannot write blob " + hash);
  }
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::StorageError, "cannot place blob " + hash + ": " + ec.message());
  return hash;
}

std::optional<Bytes> FileBlobStore::get(const std::string& hash) const {
  if (hash.size() < 2) return std::nullopt;
  return read_file(path_for(hash));
}

std::size_t FileBlobStore::blob_count() const {
  std::error_code ec;
  if (!fs::exists(root_, ec)) return 0;
  std::size_t n = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().extension() != ".tmp") ++n;
  }
  return n;
}

std::string MemoryBlobStore::put(std::span<const std::uint8_t> bytes) {
  std::string hash = sha256_hex(bytes);
  blobs_.try_emplace(hash, bytes.begin(), bytes.end());
  return hash;
}

std::optional<Bytes> MemoryBlobStore::get(const std::string& hash) const {
  auto it = blobs_.find(hash);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

Bytes* MemoryBlobStore::mutable_blob(const std::string& hash) {
  auto it = blobs_.find(hash);
  return it == blobs_.end() ? nullptr : &it->second;
}

std::string_view to_string(VerifyStatus s) noexcept {
  switch (s) {
    case VerifyStatus::Ok: return "ok";
    case VerifyStatus::Mismatch: return "mismatch";
    case VerifyStatus::BlobMissing: return "blob_missing";
  }
  return "?";
}

nlohmann::json VerificationResult::to_json() const {
  return {{"evidence", evidence},
          {"status", std::string(to_string(status))},
          {"expected", expected},
          {"actual", actual}};
}

VerificationResult verify_blob(const BlobStore& store, const EvidenceItem& item) {
  VerificationResult r{item.id, VerifyStatus::Ok, item.content_hash, ""};
  auto bytes = store.get(item.content_hash);
  if (!bytes) {
    r.status = VerifyStatus::BlobMissing;
    return r;
  }
  r.actual = sha256_hex(*bytes);
  if (r.actual != r.expected) r.status = VerifyStatus::Mismatch;
  return r;
}

std::string custody_entry_hash(const CustodyEntry& entry) {
  nlohmann::json j = to_json(entry);
  j.erase("entry_hash");
  j.erase("signature");
  return sha256_hex(canonical_json(j));
}

CustodyEntry make_custody_entry(const std::vector<CustodyEntry>& chain, const EvidenceId& evidence,
                                CustodyAction action, std::string actor, Timestamp at,
                                const SigningKey& key) {
  CustodyEntry e;
  e.seq = chain.size() + 1;
  e.evidence = evidence;
  e.action = action;
  e.actor = std::move(actor);
  e.at = at;
  e.prev_hash = chain.empty() ? std::string(kZeroHash) : chain.back().entry_hash;
  e.signer_key_id = key.key_id();
  e.entry_hash = custody_entry_hash(e);
  e.signature = key.sign(e.entry_hash);
  return e;
}

ChainResult verify_chain(const std::vector<CustodyEntry>& chain,
                         const std::map<std::string, SignerKey>& keys) {
  std::string expected_prev(kZeroHash);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const CustodyEntry& e = chain[i];
    const std::uint64_t pos = i + 1;
    if (e.prev_hash != expected_prev || e.seq != pos) {
      return {ChainBreak{pos, BreakReason::HashLink, "entry does not link to its predecessor"}};
    }
    if (custody_entry_hash(e) != e.entry_hash) {
      return {ChainBreak{pos, BreakReason::EntryHash, "entry content does not match entry_hash"}};
    }
    auto key = keys.find(e.signer_key_id);
    if (key == keys.end()) {
      return {ChainBreak{pos, BreakReason::Signature, "signer " + e.signer_key_id + " is not registered"}};
    }
    if (!verify_signature(key->second.public_key, e.entry_hash, e.signature)) {
      return {ChainBreak{pos, BreakReason::Signature, "signature does not verify"}};
    }
    expected_prev = e.entry_hash;
  }
  return {};
}

ChainResult verify_chain(const Case& c) { return verify_chain(c.custody, c.signer_keys); }

Manifest build_manifest(const Case& c) {
  Manifest m;
  m.case_id = c.id;
  for (const auto& [_, item] : c.evidence) m.items.push_back(item);
  m.custody = c.custody;
  for (const auto& [_, k] : c.signer_keys) m.signer_keys.push_back(k);
  return m;
}

std::string render_manifest(const Manifest& m) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : m.items) items.push_back(to_json(i));
  nlohmann::json custody = nlohmann::json::array();
  for (const auto& e : m.custody) custody.push_back(to_json(e));
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& k : m.signer_keys) keys.push_back({{"key_id", k.key_id}, {"public_key", k.public_key}});
  const nlohmann::json doc = {
      {"schema", kManifestSchema},
      {"case_id", m.case_id},
      {"items", std::move(items)},
      {"custody", std::move(custody)},
      {"signer_keys", std::move(keys)},
  };
  return canonical_json(doc) + "\n";
}

Manifest parse_manifest(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("manifest is not JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kManifestSchema) {
    throw Error(ErrorKind::UnsupportedSchema, "not a flower manifest");
  }
  Manifest m;
  try {
    m.case_id = doc.at("case_id").get<CaseId>();
    for (const auto& i : doc.at("items")) m.items.push_back(evidence_from_json(i));
    for (const auto& e : doc.at("custody")) m.custody.push_back(custody_from_json(e));
    for (const auto& k : doc.at("signer_keys")) {
      m.signer_keys.push_back({k.at("key_id").get<std::string>(), k.at("public_key").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const Manifest& m, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string text = render_manifest(m);
  write_text(dir / kManifestFile, text);
  write_text(dir / kManifestSidecar, sha256_hex(text) + "\n");
}

Manifest read_manifest(const fs::path& dir) {
  const std::string text = read_text(dir / kManifestFile);
  std::string sidecar = read_text(dir / kManifestSidecar);
  if (sidecar != sha256_hex(text) + "\n") {
    throw Error(ErrorKind::ManifestTampered, "manifest hash does not match its sidecar");
  }
  return parse_manifest(text);
}

}  // namespace flower
