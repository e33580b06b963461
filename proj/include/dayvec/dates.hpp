#pragma once

#include "dayvec/types.hpp"

#include <string>
#include <string_view>

namespace dayvec {

constexpr std::int64_t kSecondsPerDay = 86400;

// "YYYY-MM-DD" -> days since epoch. Throws Error on malformed input.
Date parse_date(std::string_view s);

// ISO-8601 UTC instant with second precision: "YYYY-MM-DDTHH:MM:SS" with an
// optional trailing "Z" or "+00:00". Throws Error on malformed input.
Timestamp parse_timestamp(std::string_view s);

std::string format_date(Date d);
std::string format_timestamp(Timestamp t);

inline Date date_of(Timestamp t) {
  // Timestamps before the epoch need floor division.
  std::int64_t d = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --d;
  return static_cast<Date>(d);
}

inline std::int64_t seconds_into_day(Timestamp t) {
  return t - static_cast<std::int64_t>(date_of(t)) * kSecondsPerDay;
}

}  // namespace dayvec
