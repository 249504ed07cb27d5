#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace senticast {

/// Calendar date stored as days since 1970-01-01.
struct Date {
  int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
  Date next() const { return Date{days + 1}; }

  /// 0 = Sunday ... 6 = Saturday.
  int weekday() const;
  bool is_weekend() const {
    int w = weekday();
    return w == 0 || w == 6;
  }
};

Date make_date(int year, int month, int day);

/// Parses strict `YYYY-MM-DD`. Throws ValidationError on malformed input.
Date parse_date(std::string_view s);
std::string to_string(Date d);

/// Wall-clock timestamp as seconds since 1970-01-01 00:00:00.
///
/// Timestamps are interpreted as exchange-local wall clock. A trailing
/// `Z` or `+HH:MM` offset, when present, is normalized away first.
struct Timestamp {
  int64_t seconds = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
  Date date() const;
  /// Seconds since local midnight, in [0, 86400).
  int seconds_of_day() const;
};

/// Parses ISO-8601 `YYYY-MM-DD[T ]HH:MM[:SS][.frac][Z|±HH[:MM]]`.
/// Fractional seconds are truncated. Throws ValidationError on malformed input.
Timestamp parse_timestamp(std::string_view s);
std::string to_string(Timestamp t);

/// Parses `HH:MM` or `HH:MM:SS` into seconds since midnight.
int parse_time_of_day(std::string_view s);

}  // namespace senticast
