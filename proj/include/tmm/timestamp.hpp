#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tmm {

/// UTC instant with millisecond resolution.
class Timestamp {
 public:
  constexpr Timestamp() = default;

  static constexpr Timestamp from_unix_ms(std::int64_t ms) { return Timestamp(ms); }
  static Timestamp now();

  /// Parses "YYYY-MM-DDTHH:MM:SS.mmmZ" (the fraction is optional on input).
  /// Throws Error{InvalidArgument} on anything else.
  static Timestamp parse_iso8601(std::string_view text);

  /// Always emits exactly three fractional digits and a trailing 'Z'.
  std::string to_iso8601() const;

  constexpr std::int64_t unix_ms() const { return ms_; }

  constexpr Timestamp operator+(std::chrono::milliseconds d) const {
    return Timestamp(ms_ + d.count());
  }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  constexpr explicit Timestamp(std::int64_t ms) : ms_(ms) {}

  std::int64_t ms_ = 0;
};

/// Absolute difference, in milliseconds.
inline std::chrono::milliseconds elapsed_between(Timestamp a, Timestamp b) {
  const auto d = a.unix_ms() - b.unix_ms();
  return std::chrono::milliseconds(d < 0 ? -d : d);
}

}  // namespace tmm
