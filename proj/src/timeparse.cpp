#include "nexica/timeparse.hpp"

#include <chrono>
#include <cstdio>

namespace nexica {

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::optional<std::int64_t> civil_day(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  std::size_t pos = 0;
  if (s.size() >= 10 && s[2] == '/' && s[5] == '/') {
    if (!read_digits(s, 0, 2, mo) || !read_digits(s, 3, 2, d) || !read_digits(s, 6, 4, y)) return std::nullopt;
    pos = 10;
  } else {
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!read_digits(s, 0, 4, y) || !read_digits(s, 5, 2, mo) || !read_digits(s, 8, 2, d)) return std::nullopt;
    pos = 10;
  }
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != ' ')) return std::nullopt;
  ++pos;
  if (!read_digits(s, pos, 2, h) || pos + 2 >= s.size() || s[pos + 2] != ':' ||
      !read_digits(s, pos + 3, 2, mi)) {
    return std::nullopt;
  }
  pos += 5;
  if (pos < s.size() && s[pos] == ':') {
    if (!read_digits(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
  }
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;

  Timestamp ts;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ts.utc_offset_minutes = 0;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      int oh = 0, om = 0;
      if (!read_digits(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t p = pos + 3;
      if (p < s.size() && s[p] == ':') ++p;
      if (!read_digits(s, p, 2, om) || p + 2 != s.size()) return std::nullopt;
      ts.utc_offset_minutes = sign * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  const auto day = civil_day(y, mo, d);
  if (!day) return std::nullopt;
  ts.civil_minutes = *day * 1440 + h * 60 + mi;
  ts.seconds = sec;
  return ts;
}

std::string format_timestamp(std::int64_t local_minutes, int utc_offset_minutes) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(local_minutes, 1440);
  const std::int64_t mod = local_minutes - days * 1440;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(mod / 60), static_cast<int>(mod % 60));
  std::string out(buf);
  if (utc_offset_minutes == 0) {
    out += 'Z';
  } else {
    const int a = utc_offset_minutes < 0 ? -utc_offset_minutes : utc_offset_minutes;
    std::snprintf(buf, sizeof(buf), "%c%02d:%02d", utc_offset_minutes < 0 ? '-' : '+', a / 60, a % 60);
    out += buf;
  }
  return out;
}

int week_slot(std::int64_t local_slot) {
  const std::int64_t day = floor_div(local_slot, kSlotsPerDay);
  const std::int64_t in_day = local_slot - day * kSlotsPerDay;
  // 1970-01-01 was a Thursday, three days after a Monday.
  std::int64_t weekday = (day + 3) % 7;
  if (weekday < 0) weekday += 7;
  return static_cast<int>(weekday * kSlotsPerDay + in_day);
}

} // namespace nexica
