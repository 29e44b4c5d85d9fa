#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flower {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::string_view kZeroHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
// Returns false on malformed input.
bool base64_decode(std::string_view text, Bytes& out);

bool is_hex_digest(std::string_view text) noexcept;

// Ed25519 private key. Never persisted by the vault; callers load it from a
// PEM file per invocation.
class SigningKey {
 public:
  static SigningKey generate();
  // Deterministic key from a 32-byte private seed.
  static SigningKey from_seed(std::span<const std::uint8_t, 32> seed);
  // Throws Error{SigningError} when the PEM is not an Ed25519 private key.
  static SigningKey from_pem(std::string_view pem);

  SigningKey(SigningKey&&) noexcept;
  SigningKey& operator=(SigningKey&&) noexcept;
  ~SigningKey();

  std::string to_pem() const;
  // Raw 32-byte public key, base64.
  std::string public_key() const;
  // First 16 hex chars of SHA-256 over the raw public key.
  std::string key_id() const;
  // Base64 signature over the message bytes. Throws Error{SigningError}.
  std::string sign(std::string_view message) const;

 private:
  struct Impl;
  explicit SigningKey(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

std::string key_id_for(std::string_view public_key_b64);

bool verify_signature(std::string_view public_key_b64, std::string_view message,
                      std::string_view signature_b64) noexcept;

}  // namespace flower
