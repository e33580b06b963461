#include "dayvec/ingest.hpp"

#include "dayvec/csv.hpp"

#include <algorithm>
#include <tuple>

namespace dayvec {

std::optional<LabelPolarity> LabelSet::find(const std::string& participant_id,
                                            Date date) const {
  for (const auto& e : entries) {
    if (e.participant_id == participant_id && e.date == date) {
      return e.polarity;
    }
  }
  return std::nullopt;
}

const char* to_string(LabelPolarity p) {
  return p == LabelPolarity::kPositive ? "positive" : "negative";
}

std::vector<SensorEvent> parse_events(std::istream& in,
                                      std::string_view stream_name) {
  require_csv_header(in, "participant_id,timestamp,location", stream_name);
  std::vector<SensorEvent> events;
  std::string line;
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string at =
        std::string(stream_name) + " line " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(at + ": expected 3 fields, got " +
                  std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(at + ": empty participant_id");
    if (fields[2].empty()) throw Error(at + ": empty location");
    SensorEvent ev;
    ev.participant_id = fields[0];
    try {
      ev.timestamp = parse_timestamp(fields[1]);
    } catch (const Error& e) {
      throw Error(at + ": " + e.what());
    }
    ev.location = fields[2];
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<DayRecord> group_days(const std::vector<SensorEvent>& events) {
  std::map<std::pair<std::string, Date>, std::vector<SensorEvent>> grouped;
  for (const auto& ev : events) {
    grouped[{ev.participant_id, date_of(ev.timestamp)}].push_back(ev);
  }
  std::vector<DayRecord> days;
  days.reserve(grouped.size());
  for (auto& [key, evs] : grouped) {
    std::sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.timestamp, a.location) <
             std::tie(b.timestamp, b.location);
    });
    days.push_back(DayRecord{key.first, key.second, std::move(evs)});
  }
  return days;
}

ValidationReport validate_events(const std::vector<SensorEvent>& events,
                                 const std::set<std::string>& known_locations,
                                 Timestamp min_timestamp,
                                 Timestamp max_timestamp) {
  constexpr std::size_t kMaxSamples = 10;
  ValidationReport report;
  report.n_events = events.size();
  std::set<std::tuple<std::string, Timestamp, std::string>> seen;
  for (const auto& ev : events) {
    if (!known_locations.contains(ev.location)) {
      ++report.unknown_locations;
      if (report.samples.size() < kMaxSamples) {
        report.samples.push_back("unknown location '" + ev.location + "' (" +
                                 ev.participant_id + " " +
                                 format_timestamp(ev.timestamp) + ")");
      }
    }
    if (ev.timestamp < min_timestamp || ev.timestamp >= max_timestamp) {
      ++report.out_of_range_timestamps;
      if (report.samples.size() < kMaxSamples) {
        report.samples.push_back("out-of-range timestamp " +
                                 format_timestamp(ev.timestamp) + " (" +
                                 ev.participant_id + ")");
      }
    }
    if (!seen.insert({ev.participant_id, ev.timestamp, ev.location}).second) {
      ++report.duplicate_rows;
      if (report.samples.size() < kMaxSamples) {
        report.samples.push_back("duplicate row (" + ev.participant_id + " " +
                                 format_timestamp(ev.timestamp) + " " +
                                 ev.location + ")");
      }
    }
  }
  return report;
}

LabelSet parse_labels(std::istream& in, std::string_view stream_name) {
  require_csv_header(in, "participant_id,date,label", stream_name);
  LabelSet set;
  std::map<std::pair<std::string, Date>, LabelPolarity> seen;
  std::string line;
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string at =
        std::string(stream_name) + " line " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(at + ": expected 3 fields, got " +
                  std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(at + ": empty participant_id");
    Date date = 0;
    try {
      date = parse_date(fields[1]);
    } catch (const Error& e) {
      throw Error(at + ": " + e.what());
    }
    LabelPolarity polarity;
    if (fields[2] == "positive") {
      polarity = LabelPolarity::kPositive;
    } else if (fields[2] == "negative") {
      polarity = LabelPolarity::kNegative;
    } else {
      throw Error(at + ": unknown label '" + fields[2] +
                  "' (expected positive or negative)");
    }
    const auto key = std::make_pair(fields[0], date);
    const auto it = seen.find(key);
    if (it != seen.end()) {
      if (it->second != polarity) {
        throw Error(at + ": conflicting duplicate label for (" + fields[0] +
                    ", " + fields[1] + ")");
      }
      continue;  // exact duplicate
    }
    seen.emplace(key, polarity);
    set.entries.push_back(LabelEntry{fields[0], date, polarity});
  }
  return set;
}

}  // namespace dayvec
