#pragma once

#include "dayvec/dates.hpp"
#include "dayvec/types.hpp"

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dayvec {

struct SensorEvent {
  std::string participant_id;
  Timestamp timestamp = 0;
  std::string location;

  friend bool operator==(const SensorEvent&, const SensorEvent&) = default;
};

struct DayRecord {
  std::string participant_id;
  Date date = 0;
  std::vector<SensorEvent> events;  // ascending by (timestamp, location)
};

enum class LabelPolarity { kPositive, kNegative };

struct LabelEntry {
  std::string participant_id;
  Date date = 0;
  LabelPolarity polarity = LabelPolarity::kNegative;
};

struct LabelSet {
  std::vector<LabelEntry> entries;  // unique (participant_id, date)

  std::optional<LabelPolarity> find(const std::string& participant_id,
                                    Date date) const;
};

struct ValidationReport {
  std::size_t n_events = 0;
  std::size_t unknown_locations = 0;
  std::size_t out_of_range_timestamps = 0;
  std::size_t duplicate_rows = 0;
  // First few offending examples, for diagnostics.
  std::vector<std::string> samples;

  bool clean() const {
    return unknown_locations == 0 && out_of_range_timestamps == 0 &&
           duplicate_rows == 0;
  }
};

// CSV with header `participant_id,timestamp,location`. Malformed rows throw
// an Error naming the 1-based line number (header is line 1).
std::vector<SensorEvent> parse_events(std::istream& in,
                                      std::string_view stream_name = "events");

// Groups events into one DayRecord per observed (participant_id, UTC date),
// events sorted ascending by (timestamp, location); records sorted by
// (participant_id, date). Deterministic and independent of input order.
std::vector<DayRecord> group_days(const std::vector<SensorEvent>& events);

// Reporting only; never mutates input. `known_locations` is the configured
// vocabulary of acceptable location tokens; timestamps outside
// [min_timestamp, max_timestamp) are counted as out of range.
ValidationReport validate_events(
    const std::vector<SensorEvent>& events,
    const std::set<std::string>& known_locations,
    Timestamp min_timestamp = parse_timestamp("2000-01-01T00:00:00Z"),
    Timestamp max_timestamp = parse_timestamp("2100-01-01T00:00:00Z"));

// CSV with header `participant_id,date,label`, label in {positive, negative}.
// Exact duplicates are dropped; conflicting duplicates are an error.
LabelSet parse_labels(std::istream& in,
                      std::string_view stream_name = "labels");

const char* to_string(LabelPolarity p);

}  // namespace dayvec
