#include "flower/id.hpp"

#include "flower/error.hpp"

#include <random>

namespace flower {
namespace {

constexpr std::string_view kAlphabet = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

int decode_char(char c) {
  const auto pos = kAlphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

using Raw = std::array<std::uint8_t, 16>;

std::string encode_raw(const Raw& raw) {
  // 128 bits into 26 symbols; the first symbol carries the top 3 bits.
  std::string out(kIdLength, '0');
  for (std::size_t i = 0; i < kIdLength; ++i) {
    const int bit_end = 130 - static_cast<int>(i) * 5;  // exclusive, counting from lsb
    unsigned v = 0;
    for (int b = bit_end - 1; b >= bit_end - 5; --b) {
      v <<= 1;
      if (b < 128) {
        const int byte = 15 - b / 8;
        v |= (raw[static_cast<std::size_t>(byte)] >> (b % 8)) & 1u;
      }
    }
    out[i] = kAlphabet[v];
  }
  return out;
}

Raw decode_raw(std::string_view text) {
  Raw raw{};
  for (std::size_t i = 0; i < kIdLength; ++i) {
    const int v = decode_char(text[i]);
    const int bit_end = 130 - static_cast<int>(i) * 5;
    for (int k = 0; k < 5; ++k) {
      const int b = bit_end - 5 + k;
      if (b < 128 && ((v >> k) & 1)) {
        raw[static_cast<std::size_t>(15 - b / 8)] |= static_cast<std::uint8_t>(1u << (b % 8));
      }
    }
  }
  return raw;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

IdGenerator::Entropy random_entropy(std::string_view) {
  static thread_local std::random_device device;
  IdGenerator::Entropy e{};
  for (auto& byte : e) byte = static_cast<std::uint8_t>(device() & 0xFF);
  return e;
}

}  // namespace

bool is_valid_id(std::string_view text) noexcept {
  if (text.size() != kIdLength) return false;
  for (char c : text) {
    if (decode_char(c) < 0) return false;
  }
  // 26 symbols hold 130 bits; the leading symbol may only use 3.
  return decode_char(text[0]) <= 7;
}

void throw_invalid_id(std::string_view text) {
  throw Error(ErrorKind::ValidationError, "malformed identifier '" + std::string(text) + "'");
}

std::string encode_id(std::uint64_t millis, const IdGenerator::Entropy& entropy) {
  Raw raw{};
  for (int i = 0; i < 6; ++i) {
    raw[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(millis >> (8 * (5 - i)));
  }
  for (std::size_t i = 0; i < entropy.size(); ++i) raw[6 + i] = entropy[i];
  return encode_raw(raw);
}

IdGenerator::IdGenerator() : source_(random_entropy) {}

IdGenerator::IdGenerator(EntropySource source) : source_(std::move(source)) {}

IdGenerator IdGenerator::seeded(std::uint64_t seed) {
  return IdGenerator([seed](std::string_view previous) {
    std::uint64_t state = seed ^ fnv1a(previous);
    Entropy e{};
    const std::uint64_t a = splitmix64(state);
    const std::uint64_t b = splitmix64(state);
    for (int i = 0; i < 8; ++i) e[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(a >> (8 * i));
    e[8] = static_cast<std::uint8_t>(b);
    e[9] = static_cast<std::uint8_t>(b >> 8);
    return e;
  });
}

void IdGenerator::observe(std::string_view id) {
  if (is_valid_id(id) && id > last_) last_ = std::string(id);
}

std::string IdGenerator::next(Timestamp now) {
  const auto secs = now.unix_seconds();
  const std::uint64_t millis = secs < 0 ? 0 : static_cast<std::uint64_t>(secs) * 1000u;
  std::string candidate = encode_id(millis, source_(last_));
  if (candidate <= last_) {
    // Same or earlier millisecond than the previous id: bump the previous
    // id's 80-bit entropy by one so ordering stays strict.
    Raw raw = decode_raw(last_);
    for (int i = 15; i >= 0; --i) {
      if (++raw[static_cast<std::size_t>(i)] != 0) break;
    }
    candidate = encode_raw(raw);
  }
  last_ = candidate;
  return candidate;
}

}  // namespace flower
