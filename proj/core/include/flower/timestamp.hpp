#pragma once

#include <nlohmann/json.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace flower {

// UTC instant at whole-second precision. Text form is RFC 3339 with a
// mandatory "Z" suffix, e.g. "2019-02-05T14:03:00Z".
class Timestamp {
 public:
  constexpr Timestamp() = default;
  static constexpr Timestamp from_unix(std::int64_t seconds) { return Timestamp(seconds); }

  // Throws Error{ValidationError} for anything but YYYY-MM-DDTHH:MM:SSZ.
  static Timestamp parse(std::string_view text);
  static std::optional<Timestamp> try_parse(std::string_view text) noexcept;
  static Timestamp now();

  constexpr std::int64_t unix_seconds() const { return seconds_; }
  std::string to_string() const;

  constexpr auto operator<=>(const Timestamp&) const = default;

 private:
  constexpr explicit Timestamp(std::int64_t s) : seconds_(s) {}
  std::int64_t seconds_ = 0;
};

using Clock = std::function<Timestamp()>;

void to_json(nlohmann::json& j, const Timestamp& t);
void from_json(const nlohmann::json& j, Timestamp& t);

}  // namespace flower
