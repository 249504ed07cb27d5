#include "senticast/date.hpp"

#include <charconv>
#include <chrono>

#include "senticast/errors.hpp"

namespace senticast {

namespace {

int parse_int_field(std::string_view s, size_t pos, size_t len, const char* what) {
  if (pos + len > s.size()) throw ValidationError(std::string("truncated ") + what + ": '" + std::string(s) + "'");
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc() || ptr != s.data() + pos + len)
    throw ValidationError(std::string("bad ") + what + " in '" + std::string(s) + "'");
  return value;
}

}  // namespace

int Date::weekday() const {
  // 1970-01-01 was a Thursday.
  int w = (days % 7 + 7) % 7;
  return (w + 4) % 7;
}

Date make_date(int year, int month, int day) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                     std::chrono::day{unsigned(day)}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date");
  return Date{int32_t(sys_days{ymd}.time_since_epoch().count())};
}

Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ValidationError("expected YYYY-MM-DD, got '" + std::string(s) + "'");
  int y = parse_int_field(s, 0, 4, "year");
  int m = parse_int_field(s, 5, 2, "month");
  int d = parse_int_field(s, 8, 2, "day");
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                     std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date '" + std::string(s) + "'");
  return Date{int32_t(sys_days{ymd}.time_since_epoch().count())};
}

std::string to_string(Date d) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{d.days}}};
  char buf[11];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

Date Timestamp::date() const {
  int64_t d = seconds / 86400;
  if (seconds < 0 && seconds % 86400 != 0) --d;
  return Date{int32_t(d)};
}

int Timestamp::seconds_of_day() const {
  int64_t r = seconds % 86400;
  if (r < 0) r += 86400;
  return int(r);
}

Timestamp parse_timestamp(std::string_view s) {
  if (s.size() < 16) throw ValidationError("truncated timestamp '" + std::string(s) + "'");
  Date d = parse_date(s.substr(0, 10));
  if (s[10] != 'T' && s[10] != ' ')
    throw ValidationError("expected 'T' or ' ' date/time separator in '" + std::string(s) + "'");
  int hh = parse_int_field(s, 11, 2, "hour");
  if (s[13] != ':') throw ValidationError("bad time in '" + std::string(s) + "'");
  int mm = parse_int_field(s, 14, 2, "minute");
  size_t pos = 16;
  int ss = 0;
  if (pos < s.size() && s[pos] == ':') {
    ss = parse_int_field(s, pos + 1, 2, "second");
    pos += 3;
  }
  if (hh > 23 || mm > 59 || ss > 60)
    throw ValidationError("time of day out of range in '" + std::string(s) + "'");
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) throw ValidationError("empty fractional seconds in '" + std::string(s) + "'");
  }
  int64_t offset = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int sign = c == '+' ? 1 : -1;
      int oh = parse_int_field(s, pos + 1, 2, "offset hour");
      pos += 3;
      int om = 0;
      if (pos < s.size() && s[pos] == ':') {
        om = parse_int_field(s, pos + 1, 2, "offset minute");
        pos += 3;
      } else if (pos + 2 <= s.size()) {
        om = parse_int_field(s, pos, 2, "offset minute");
        pos += 2;
      }
      offset = sign * (oh * 3600 + om * 60);
    } else {
      throw ValidationError("trailing garbage in timestamp '" + std::string(s) + "'");
    }
  }
  if (pos != s.size())
    throw ValidationError("trailing garbage in timestamp '" + std::string(s) + "'");
  int64_t secs = int64_t(d.days) * 86400 + hh * 3600 + mm * 60 + ss - offset;
  return Timestamp{secs};
}

std::string to_string(Timestamp t) {
  char buf[32];
  Date d = t.date();
  int sod = t.seconds_of_day();
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", to_string(d).c_str(), sod / 3600,
                (sod / 60) % 60, sod % 60);
  return buf;
}

int parse_time_of_day(std::string_view s) {
  if (s.size() != 5 && s.size() != 8)
    throw ValidationError("expected HH:MM[:SS], got '" + std::string(s) + "'");
  int hh = parse_int_field(s, 0, 2, "hour");
  if (s[2] != ':') throw ValidationError("expected HH:MM[:SS], got '" + std::string(s) + "'");
  int mm = parse_int_field(s, 3, 2, "minute");
  int ss = 0;
  if (s.size() == 8) {
    if (s[5] != ':') throw ValidationError("expected HH:MM[:SS], got '" + std::string(s) + "'");
    ss = parse_int_field(s, 6, 2, "second");
  }
  if (hh > 23 || mm > 59 || ss > 59)
    throw ValidationError("time of day out of range: '" + std::string(s) + "'");
  return hh * 3600 + mm * 60 + ss;
}

}  // namespace senticast
