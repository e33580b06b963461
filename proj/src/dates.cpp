#include "dayvec/dates.hpp"

#include <charconv>
#include <chrono>

namespace dayvec {

namespace {

int parse_int(std::string_view s, int lo, int hi, const char* what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < lo ||
      v > hi) {
    throw Error(std::string("invalid ") + what + ": '" + std::string(s) + "'");
  }
  return v;
}

Date civil_to_days(int y, int m, int d) {
  namespace chr = std::chrono;
  const chr::year_month_day ymd{chr::year(y), chr::month(unsigned(m)),
                                chr::day(unsigned(d))};
  if (!ymd.ok()) throw Error("invalid calendar date");
  return static_cast<Date>(
      chr::sys_days(ymd).time_since_epoch().count());
}

}  // namespace

Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    throw Error("invalid date: '" + std::string(s) + "' (expected YYYY-MM-DD)");
  }
  const int y = parse_int(s.substr(0, 4), 0, 9999, "year");
  const int m = parse_int(s.substr(5, 2), 1, 12, "month");
  const int d = parse_int(s.substr(8, 2), 1, 31, "day");
  return civil_to_days(y, m, d);
}

Timestamp parse_timestamp(std::string_view s) {
  if (s.size() >= 1 && s.back() == 'Z') {
    s.remove_suffix(1);
  } else if (s.size() >= 6 && (s.substr(s.size() - 6) == "+00:00")) {
    s.remove_suffix(6);
  }
  if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') {
    throw Error("invalid timestamp: '" + std::string(s) +
                "' (expected YYYY-MM-DDTHH:MM:SS[Z])");
  }
  const Date days = parse_date(s.substr(0, 10));
  const int hh = parse_int(s.substr(11, 2), 0, 23, "hour");
  const int mm = parse_int(s.substr(14, 2), 0, 59, "minute");
  const int ss = parse_int(s.substr(17, 2), 0, 59, "second");
  return static_cast<Timestamp>(days) * kSecondsPerDay + hh * 3600 + mm * 60 +
         ss;
}

std::string format_date(Date d) {
  namespace chr = std::chrono;
  const chr::year_month_day ymd{chr::sys_days(chr::days(d))};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  const Date d = date_of(t);
  const std::int64_t rem = seconds_into_day(t);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", int(rem / 3600),
                int((rem / 60) % 60), int(rem % 60));
  return format_date(d) + buf;
}

}  // namespace dayvec
