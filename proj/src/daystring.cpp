#include "dayvec/daystring.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace dayvec {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> data_tokens) {
  if (data_tokens.empty()) throw Error("Vocabulary: no data tokens");
  tokens_ = std::move(data_tokens);
  tokens_.push_back(kPadToken);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error("Vocabulary: empty token");
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error("Vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
  const auto it = ids_.find(kNowhereToken);
  if (it == ids_.end() || it->second == pad_id()) {
    throw Error("Vocabulary: '" + kNowhereToken + "' must be a data token");
  }
  nowhere_id_ = it->second;
}

Vocabulary Vocabulary::default_vocabulary() {
  return Vocabulary({"Lounge", "Kitchen", "Hallway", "Bedroom", "Bathroom",
                     "Bed", kNowhereToken});
}

int Vocabulary::id(const std::string& token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) throw Error("unknown token '" + token + "'");
  return it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.contains(token);
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw Error("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::data_tokens() const {
  return {tokens_.begin(), tokens_.end() - 1};
}

std::set<std::string> Vocabulary::data_token_set() const {
  return {tokens_.begin(), tokens_.end() - 1};
}

TokenSequence aggregate_day(const DayRecord& day, const Vocabulary& vocab,
                            Rng& rng) {
  // counts[w][id] = events of location id in window w
  std::vector<std::vector<int>> counts(
      kWindowsPerDay, std::vector<int>(vocab.n_data_tokens(), 0));
  const Timestamp day_start =
      static_cast<Timestamp>(day.date) * kSecondsPerDay;
  for (const auto& ev : day.events) {
    const std::int64_t offset = ev.timestamp - day_start;
    if (offset < 0 || offset >= kSecondsPerDay) {
      throw Error("aggregate_day: event at " + format_timestamp(ev.timestamp) +
                  " outside day " + format_date(day.date));
    }
    int id = -1;
    if (!vocab.contains(ev.location) ||
        (id = vocab.id(ev.location)) == vocab.pad_id()) {
      throw Error("aggregate_day: event location '" + ev.location +
                  "' not in vocabulary (" + day.participant_id + " " +
                  format_timestamp(ev.timestamp) + ")");
    }
    const int w = static_cast<int>(offset / (kWindowMinutes * 60));
    ++counts[w][id];
  }

  TokenSequence seq;
  seq.participant_id = day.participant_id;
  seq.date = day.date;
  seq.tokens.reserve(kWindowsPerDay);
  for (int w = 0; w < kWindowsPerDay; ++w) {
    int best = 0;
    for (int id = 0; id < vocab.n_data_tokens(); ++id) {
      best = std::max(best, counts[w][id]);
    }
    if (best == 0) {
      seq.tokens.push_back(kNowhereToken);
      continue;
    }
    std::vector<int> tied;  // in vocabulary id order
    for (int id = 0; id < vocab.n_data_tokens(); ++id) {
      if (counts[w][id] == best) tied.push_back(id);
    }
    const int pick = tied.size() == 1
                         ? tied[0]
                         : tied[static_cast<std::size_t>(
                               rng.bounded(tied.size()))];
    seq.tokens.push_back(vocab.token(pick));
  }
  return seq;
}

DayString render_string(const TokenSequence& seq) {
  DayString ds;
  ds.participant_id = seq.participant_id;
  ds.date = seq.date;
  std::string text;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) text += ' ';
    text += seq.tokens[i];
  }
  ds.text = std::move(text);
  return ds;
}

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  std::istringstream words(text);
  std::string word;
  while (words >> word) {
    if (!vocab.contains(word) || vocab.id(word) == vocab.pad_id()) {
      throw Error("tokenize: unknown token '" + word + "'");
    }
    ids.push_back(vocab.id(word));
    if (ids.size() > kMaxTokens) {
      throw Error("tokenize: sequence exceeds " + std::to_string(kMaxTokens) +
                  " tokens");
    }
  }
  return ids;
}

void write_daystring_corpus(std::ostream& out,
                            const std::vector<DayString>& corpus) {
  for (const auto& ds : corpus) {
    json row = {{"participant_id", ds.participant_id},
                {"date", format_date(ds.date)},
                {"text", ds.text}};
    out << row.dump() << '\n';
  }
}

std::vector<DayString> read_daystring_corpus(std::istream& in) {
  std::vector<DayString> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("daystring corpus line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    DayString ds;
    ds.participant_id = row.at("participant_id").get<std::string>();
    ds.date = parse_date(row.at("date").get<std::string>());
    ds.text = row.at("text").get<std::string>();
    corpus.push_back(std::move(ds));
  }
  return corpus;
}

}  // namespace dayvec
