#include "rigcast/time.hpp"

#include <charconv>
#include <cstdio>

#include "rigcast/error.hpp"

namespace rigcast {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  auto sub = text.substr(pos, len);
  auto [ptr, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), value);
  if (ec != std::errc{} || ptr != sub.data() + sub.size()) {
    throw FormatError("bad timestamp '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Timestamp parse_time(std::string_view text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
    throw FormatError("bad timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_field(text, 0, 4)},
                           month{static_cast<unsigned>(parse_field(text, 5, 2))},
                           day{static_cast<unsigned>(parse_field(text, 8, 2))}};
  const int hh = parse_field(text, 11, 2);
  const int mm = parse_field(text, 14, 2);
  const int ss = parse_field(text, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw FormatError("bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + std::chrono::hours{hh} + std::chrono::minutes{mm} + seconds{ss};
}

std::string format_time(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::size_t to_samples(Duration d, Duration period) {
  if (period.count() <= 0 || d.count() < 0 || d.count() % period.count() != 0) {
    throw ConfigurationError("duration of " + std::to_string(d.count()) +
                             " s is not a whole number of " + std::to_string(period.count()) +
                             " s samples");
  }
  return static_cast<std::size_t>(d.count() / period.count());
}

}  // namespace rigcast
