#include "rucs/clock.hpp"

#include <charconv>
#include <cstdio>

namespace rucs {

namespace {

using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
  const sys_time<milliseconds> tp{milliseconds{t.ms}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()),
                static_cast<long>(hms.subseconds().count()));
  return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff...](Z|+HH:MM|-HH:MM)
  if (s.size() < 20) return std::nullopt;
  int y, mo, d, h, mi, sec;
  if (!parse_int(s.substr(0, 4), y) || s[4] != '-' || !parse_int(s.substr(5, 2), mo) ||
      s[7] != '-' || !parse_int(s.substr(8, 2), d) || (s[10] != 'T' && s[10] != 't') ||
      !parse_int(s.substr(11, 2), h) || s[13] != ':' || !parse_int(s.substr(14, 2), mi) ||
      s[16] != ':' || !parse_int(s.substr(17, 2), sec)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t frac_ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) frac_ms = frac_ms * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) frac_ms *= 10;
  }
  if (pos >= s.size()) return std::nullopt;

  std::int64_t offset_min = 0;
  const std::string_view zone = s.substr(pos);
  if (zone == "Z" || zone == "z") {
    offset_min = 0;
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int oh, om;
    if (!parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om)) return std::nullopt;
    offset_min = oh * 60 + om;
    if (zone[0] == '-') offset_min = -offset_min;
  } else {
    return std::nullopt;
  }

  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{frac_ms} -
                  minutes{offset_min};
  return Timestamp{duration_cast<milliseconds>(tp.time_since_epoch()).count()};
}

Timestamp SystemClock::now() const {
  return Timestamp{
      duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

}  // namespace rucs
