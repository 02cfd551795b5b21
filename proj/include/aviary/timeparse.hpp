#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace aviary {

// Timestamps are stored as seconds since the Unix epoch, UTC. Two input
// forms are accepted:
//   RFC 3339            2013-06-15T12:30:45Z, offsets and fractions allowed
//   classic archive     Wed Aug 27 13:08:45 +0000 2008
// Canonical output is RFC 3339 with a Z suffix and whole seconds.

namespace detail_time {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month, day;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr bool is_leap(std::int64_t y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

constexpr unsigned days_in_month(std::int64_t y, unsigned m) {
  constexpr unsigned char lengths[] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

inline bool parse_uint(std::string_view s, std::size_t pos, std::size_t len,
                       unsigned& out) {
  if (pos + len > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

inline std::optional<std::int64_t> compose_utc(unsigned year, unsigned month,
                                               unsigned day, unsigned hour,
                                               unsigned minute, unsigned sec,
                                               std::int64_t offset_seconds) {
  if (month < 1 || month > 12) return std::nullopt;
  if (day < 1 || day > days_in_month(year, month)) return std::nullopt;
  if (hour > 23 || minute > 59 || sec > 60) return std::nullopt;
  if (sec == 60) sec = 59;  // leap second, clamped
  const std::int64_t days = days_from_civil(year, month, day);
  return days * 86400 + hour * 3600 + minute * 60 + sec - offset_seconds;
}

// 2013-06-15T12:30:45(.ff...)?(Z|+hh:mm|-hh:mm)
inline std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
  unsigned year, month, day, hour, minute, sec;
  if (!parse_uint(s, 0, 4, year) || !parse_uint(s, 5, 2, month) ||
      !parse_uint(s, 8, 2, day) || !parse_uint(s, 11, 2, hour) ||
      !parse_uint(s, 14, 2, minute) || !parse_uint(s, 17, 2, sec))
    return std::nullopt;
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {  // fractional seconds: truncate
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos, ++digits;
    if (digits == 0) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  std::int64_t offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const bool neg = s[pos] == '-';
    unsigned oh, om;
    if (!parse_uint(s, pos + 1, 2, oh)) return std::nullopt;
    std::size_t mpos = pos + 3;
    if (mpos < s.size() && s[mpos] == ':') ++mpos;
    if (!parse_uint(s, mpos, 2, om)) return std::nullopt;
    if (oh > 23 || om > 59) return std::nullopt;
    offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
    if (neg) offset = -offset;
    pos = mpos + 2;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return compose_utc(year, month, day, hour, minute, sec, offset);
}

// Wed Aug 27 13:08:45 +0000 2008
inline std::optional<std::int64_t> parse_classic(std::string_view s) {
  if (s.size() != 30) return std::nullopt;
  static constexpr std::string_view kMonths[] = {
      "Jan", "Feb", "Mar", "Apr", "May", "Jun",
      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  if (s[3] != ' ' || s[7] != ' ' || s[10] != ' ' || s[13] != ':' ||
      s[16] != ':' || s[19] != ' ' || s[25] != ' ')
    return std::nullopt;
  unsigned month = 0;
  for (unsigned m = 0; m < 12; ++m) {
    if (s.substr(4, 3) == kMonths[m]) {
      month = m + 1;
      break;
    }
  }
  if (month == 0) return std::nullopt;
  unsigned day, hour, minute, sec, year, oh, om;
  if (!parse_uint(s, 8, 2, day) || !parse_uint(s, 11, 2, hour) ||
      !parse_uint(s, 14, 2, minute) || !parse_uint(s, 17, 2, sec) ||
      !parse_uint(s, 26, 4, year))
    return std::nullopt;
  if (s[20] != '+' && s[20] != '-') return std::nullopt;
  if (!parse_uint(s, 21, 2, oh) || !parse_uint(s, 23, 2, om))
    return std::nullopt;
  if (oh > 23 || om > 59) return std::nullopt;
  std::int64_t offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
  if (s[20] == '-') offset = -offset;
  return compose_utc(year, month, day, hour, minute, sec, offset);
}

}  // namespace detail_time

inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  if (auto t = detail_time::parse_rfc3339(s)) return t;
  return detail_time::parse_classic(s);
}

inline std::string format_timestamp(std::int64_t utc_seconds) {
  std::int64_t days = utc_seconds / 86400;
  std::int64_t rem = utc_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const auto civil = detail_time::civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(civil.year), civil.month, civil.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

}  // namespace aviary
