#pragma once

#include "flower/timestamp.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace flower {

// 26 Crockford base32 characters: a 48-bit millisecond time prefix followed
// by 80 bits of entropy (ULID layout). Lexicographic order == time order.
inline constexpr std::size_t kIdLength = 26;

bool is_valid_id(std::string_view text) noexcept;

template <class Tag>
class Id {
 public:
  Id() = default;
  // Throws Error{ValidationError} for malformed text.
  explicit Id(std::string text);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const Id&) const = default;

 private:
  std::string value_;
};

struct CaseTag {};
struct TargetTag {};
struct EdgeTag {};
struct LeafTag {};
struct QuestionTag {};
struct HypothesisTag {};
struct EvidenceTag {};
struct StepTag {};
struct CheckTag {};

using CaseId = Id<CaseTag>;
using TargetId = Id<TargetTag>;
using EdgeId = Id<EdgeTag>;
using LeafId = Id<LeafTag>;
using QuestionId = Id<QuestionTag>;
using HypothesisId = Id<HypothesisTag>;
using EvidenceId = Id<EvidenceTag>;
using StepId = Id<StepTag>;
using CheckId = Id<CheckTag>;

[[noreturn]] void throw_invalid_id(std::string_view text);

template <class Tag>
Id<Tag>::Id(std::string text) : value_(std::move(text)) {
  if (!is_valid_id(value_)) throw_invalid_id(value_);
}

template <class Tag>
void to_json(nlohmann::json& j, const Id<Tag>& id) {
  j = id.str();
}

template <class Tag>
void from_json(const nlohmann::json& j, Id<Tag>& id) {
  if (!j.is_string()) throw_invalid_id(j.dump());
  id = Id<Tag>(j.get<std::string>());
}

// Produces strictly increasing ids. Seeded with the largest id already
// present in a journal so that ids assigned across processes stay ordered.
class IdGenerator {
 public:
  using Entropy = std::array<std::uint8_t, 10>;
  // Receives the previously issued id (empty on first use).
  using EntropySource = std::function<Entropy(std::string_view previous)>;

  IdGenerator();
  explicit IdGenerator(EntropySource source);

  // Entropy derived from (seed, previous id); reproducible across processes.
  static IdGenerator seeded(std::uint64_t seed);

  void observe(std::string_view id);
  std::string next(Timestamp now);
  const std::string& last() const noexcept { return last_; }

 private:
  EntropySource source_;
  std::string last_;
};

std::string encode_id(std::uint64_t millis, const IdGenerator::Entropy& entropy);

}  // namespace flower

template <class Tag>
struct std::hash<flower::Id<Tag>> {
  std::size_t operator()(const flower::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
